#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/data/dataset.hpp"
#include "protox/explain/explain.hpp"
#include "protox/explain/image.hpp"

namespace protox::explain {

// One section of the static report: an input state, its evidence
// decomposition, and optional prototype/overlay/importance visuals.
template <typename S>
struct ReportItem {
  std::string title;
  std::string note;
  Observation input_image;
  Explanation<S> explanation;
  std::vector<std::pair<int, Observation>> prototype_images;  // (prototype id, source frame)
  std::optional<std::pair<int, ImportanceMap>> importance;    // rendered over that prototype
  std::optional<Observation> overlay;
};

namespace detail {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace detail

template <typename S>
Json explanation_json(const Explanation<S>& e, const std::vector<std::string>& action_names) {
  Json contribs = Json::array();
  for (const auto& c : e.contributions)
    contribs.push_back({{"prototype", c.prototype_id},
                        {"action_tag", action_names.at(static_cast<std::size_t>(c.action_tag))},
                        {"source", {c.source.first, c.source.second}},
                        {"similarity", c.similarity},
                        {"weight", c.weight},
                        {"contribution", c.contribution}});
  std::vector<double> ev(e.evidence.size()), sims(e.similarities.size());
  for (Eigen::Index i = 0; i < e.evidence.size(); ++i) ev[static_cast<std::size_t>(i)] = e.evidence[i];
  for (Eigen::Index i = 0; i < e.similarities.size(); ++i) sims[static_cast<std::size_t>(i)] = e.similarities[i];
  return Json{{"state", {e.state_ref.first, e.state_ref.second}},
              {"predicted_action", action_names.at(static_cast<std::size_t>(e.predicted_action))},
              {"evidence", ev},
              {"similarities", sims},
              {"contributions", contribs},
              {"top_k", e.top_k}};
}

// Writes report.html, img/, and explanations.json. Output is byte-stable for
// identical inputs (no timestamps, fixed formatting).
template <typename S>
void render_report(const std::vector<ReportItem<S>>& items,
                   const std::vector<std::string>& action_names,
                   const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "img", ec);
  if (ec) throw IoError("render_report: cannot create " + (out_dir / "img").string());

  std::string html;
  html += "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n";
  html += "<title>prototype explanation report</title>\n";
  html += "<style>body{font-family:sans-serif;margin:2em;}table{border-collapse:collapse;}"
          "td,th{border:1px solid #999;padding:4px 8px;}img{image-rendering:pixelated;width:128px;}"
          ".section{margin-bottom:3em;}</style></head>\n<body>\n";
  html += "<h1>Prototype explanation report</h1>\n";

  Json all = Json::array();
  if (items.empty()) {
    html += "<p>No explanations were generated.</p>\n";
  }
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const auto& item = items[idx];
    const auto& e = item.explanation;
    const std::string tag = "s" + std::to_string(idx);

    html += "<div class=\"section\"><h2>" + detail::esc(item.title) + "</h2>\n";
    if (!item.note.empty()) html += "<p>" + detail::esc(item.note) + "</p>\n";

    const std::string input_name = "img/" + tag + "_input.png";
    write_png(item.input_image, out_dir / input_name);
    html += "<p><img src=\"" + input_name + "\" alt=\"input\"> predicted <b>" +
            detail::esc(action_names.at(static_cast<std::size_t>(e.predicted_action))) +
            "</b> with evidence " + detail::num(e.evidence[e.predicted_action]) + "</p>\n";

    html += "<table><tr><th>action</th><th>evidence</th></tr>\n";
    for (Eigen::Index a = 0; a < e.evidence.size(); ++a)
      html += "<tr><td>" + detail::esc(action_names.at(static_cast<std::size_t>(a))) + "</td><td>" +
              detail::num(e.evidence[a]) + "</td></tr>\n";
    html += "</table>\n";

    html += "<h3>Top contributions</h3>\n<table><tr><th>prototype</th><th>action tag</th>"
            "<th>similarity</th><th>weight</th><th>contribution</th><th>source</th></tr>\n";
    const int shown = std::min<int>(e.top_k, static_cast<int>(e.contributions.size()));
    for (int i = 0; i < shown; ++i) {
      const auto& c = e.contributions[static_cast<std::size_t>(i)];
      std::string img_cell;
      for (const auto& [pid, obs] : item.prototype_images) {
        if (pid == c.prototype_id) {
          const std::string name = "img/" + tag + "_proto" + std::to_string(pid) + ".png";
          write_png(obs, out_dir / name);
          img_cell = "<img src=\"" + name + "\" alt=\"prototype\">";
          break;
        }
      }
      html += "<tr><td>#" + std::to_string(c.prototype_id) + " " + img_cell + "</td><td>" +
              detail::esc(action_names.at(static_cast<std::size_t>(c.action_tag))) + "</td><td>" +
              detail::num(c.similarity) + "</td><td>" + detail::num(c.weight) + "</td><td>" +
              detail::num(c.contribution) + "</td><td>(" + std::to_string(c.source.first) + "," +
              std::to_string(c.source.second) + ")</td></tr>\n";
    }
    html += "</table>\n";

    if (item.importance) {
      const auto& [pid, map] = *item.importance;
      for (const auto& [id2, obs] : item.prototype_images) {
        if (id2 == pid) {
          const std::string name = "img/" + tag + "_importance_p" + std::to_string(pid) + ".png";
          write_png(render_heatmap(obs, map.heatmap), out_dir / name);
          html += "<h3>Importance map (prototype #" + std::to_string(pid) + ")</h3><p><img src=\"" +
                  name + "\" alt=\"importance\"></p>\n";
          break;
        }
      }
    }
    if (item.overlay) {
      const std::string name = "img/" + tag + "_overlay.png";
      write_png(*item.overlay, out_dir / name);
      html += "<h3>Nearest-state overlay</h3><p><img src=\"" + name + "\" alt=\"overlay\"></p>\n";
    }
    html += "</div>\n";

    Json j = explanation_json(e, action_names);
    j["title"] = item.title;
    if (!item.note.empty()) j["note"] = item.note;
    if (item.importance) {
      const auto& [pid, map] = *item.importance;
      const auto [my, mx] = map.argmax();
      j["importance"] = {{"prototype", pid}, {"patch_size", map.patch_size}, {"stride", map.stride},
                         {"keep_fraction", map.keep_fraction}, {"argmax", {my, mx}}};
    }
    all.push_back(std::move(j));
  }
  html += "</body></html>\n";

  {
    std::ofstream f(out_dir / "report.html", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("render_report: cannot write report.html");
    f << html;
  }
  {
    std::ofstream f(out_dir / "explanations.json", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("render_report: cannot write explanations.json");
    f << all.dump(2) << "\n";
  }
}

}  // namespace protox::explain
