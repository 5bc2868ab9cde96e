#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ces/ces_methods.hpp"
#include "ces/data.hpp"
#include "ces/metrics.hpp"
#include "ces/train.hpp"

namespace ces {

enum class Task { outlier, classification, regression, quantile };
enum class Method { ces, naive, naive_corrected, data_splitting, full_training };

const char* task_name(Task t);
const char* method_name(Method m);
std::optional<Task> parse_task(const std::string& s);
std::optional<Method> parse_method(const std::string& s);

struct PipelineConfig {
  Task task = Task::regression;
  double alpha = 0.1;
  int trials = 10;
  std::uint64_t seed = 0;
  std::size_t n = 1000;        // samples available for train + hold-out
  int test_size = -1;          // -1: task default (100; 1000 for quantile)
  int t_max = 200;
  int tau = 2;
  std::vector<std::size_t> hidden = {64, 64};
  OptimizerCfg optimizer = OptimizerCfg::adam(1e-3);
  int batch_size = 25;
  double weight_decay = 0.0;
  int classes = 3;             // classification
  SynthKind synth = SynthKind::heteroscedastic;
  ClassificationMode class_mode = ClassificationMode::label_conditional;
  double outlier_fraction = 0.5;  // share of outliers in training data / test set
  // worst-slab estimator settings
  double wsc_delta = 0.1;
  int wsc_directions = 1000;
  double wsc_split = 0.25;
  // optional CSV-backed data; synthetic when absent
  std::optional<Dataset> data;
  bool standardize = true;       // CSV only: fit on train split, apply everywhere
  bool rescale_response = false; // CSV regression only: divide y by mean |y_train|

  int resolved_test_size() const {
    if (test_size > 0) return test_size;
    return task == Task::quantile ? 1000 : 100;
  }
};

/// Runs `trials` independent experiments of one method and returns one row
/// per trial (sorted by trial index). Trials run in parallel; the CES_THREADS
/// environment variable caps the worker count. Results depend only on
/// `cfg.seed` and the per-trial index.
std::vector<MetricsRow> run_pipeline(const PipelineConfig& cfg, Method method);

}  // namespace ces
