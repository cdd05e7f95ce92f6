#pragma once

#include "protox/config.hpp"
#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/core/parallel.hpp"
#include "protox/core/rng.hpp"
#include "protox/core/tensor.hpp"
#include "protox/data/annotate.hpp"
#include "protox/data/dataset.hpp"
#include "protox/diagnostics/diagnose.hpp"
#include "protox/env/corridor.hpp"
#include "protox/eval/metrics.hpp"
#include "protox/explain/explain.hpp"
#include "protox/explain/image.hpp"
#include "protox/explain/report.hpp"
#include "protox/model/head.hpp"
#include "protox/nn/adam.hpp"
#include "protox/nn/layers.hpp"
#include "protox/pretrain/losses.hpp"
#include "protox/pretrain/miner.hpp"
#include "protox/pretrain/pretrain.hpp"
#include "protox/pretrain/vae.hpp"
#include "protox/train/objective.hpp"
#include "protox/train/trainer.hpp"
