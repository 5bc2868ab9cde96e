#include "ces/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "ces/bounds.hpp"
#include "ces/naive.hpp"
#include "ces/rng.hpp"
#include "ces/splits.hpp"

namespace ces {

const char* task_name(Task t) {
  switch (t) {
    case Task::outlier: return "outlier";
    case Task::classification: return "classification";
    case Task::regression: return "regression";
    case Task::quantile: return "quantile";
  }
  return "?";
}

const char* method_name(Method m) {
  switch (m) {
    case Method::ces: return "ces";
    case Method::naive: return "naive";
    case Method::naive_corrected: return "naive_corrected";
    case Method::data_splitting: return "data_splitting";
    case Method::full_training: return "full_training";
  }
  return "?";
}

std::optional<Task> parse_task(const std::string& s) {
  for (Task t : {Task::outlier, Task::classification, Task::regression, Task::quantile}) {
    if (s == task_name(t)) return t;
  }
  return std::nullopt;
}

std::optional<Method> parse_method(const std::string& s) {
  for (Method m : {Method::ces, Method::naive, Method::naive_corrected, Method::data_splitting,
                   Method::full_training}) {
    if (s == method_name(m)) return m;
  }
  return std::nullopt;
}

namespace {

struct TrialData {
  Matrix train_X;
  std::vector<double> train_y;
  Matrix select_X;  // early-stopping selection rows (three-way only)
  std::vector<double> select_y;
  Matrix cal_X;  // calibration rows; equals selection rows in two-way mode
  std::vector<double> cal_y;
  Matrix test_X;
  std::vector<double> test_y;
};

std::vector<double> select_values(const std::vector<double>& y, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

// Assembles one trial's training / selection / calibration / test blocks.
TrialData make_trial_data(const PipelineConfig& cfg, Method method, std::uint64_t trial_seed) {
  const SplitMode mode =
      method == Method::data_splitting ? SplitMode::three_way : SplitMode::ces_two_way;
  const auto test_n = static_cast<std::size_t>(cfg.resolved_test_size());
  TrialData td;

  if (cfg.task == Task::outlier) {
    // Hold-out blocks contain inliers only; training mixes in labelled
    // outliers for the binary classifier construction.
    const Dataset inliers = synth_outliers(cfg.n, 0, derive_seed(trial_seed, 1));
    const auto sp = make_splits(cfg.n, {mode, derive_seed(trial_seed, 2)});
    const double f = cfg.outlier_fraction;
    const auto n_out_train =
        static_cast<std::size_t>(std::lround(sp.train.size() * f / (1.0 - f)));
    const Dataset outliers = synth_outliers(0, n_out_train, derive_seed(trial_seed, 3));

    td.train_X = Matrix(sp.train.size() + n_out_train, inliers.X.cols);
    td.train_y.resize(td.train_X.rows);
    for (std::size_t i = 0; i < sp.train.size(); ++i) {
      std::copy(inliers.X.row(sp.train[i]), inliers.X.row(sp.train[i]) + inliers.X.cols,
                td.train_X.row(i));
      td.train_y[i] = 0.0;
    }
    for (std::size_t i = 0; i < n_out_train; ++i) {
      std::copy(outliers.X.row(i), outliers.X.row(i) + outliers.X.cols,
                td.train_X.row(sp.train.size() + i));
      td.train_y[sp.train.size() + i] = 1.0;
    }
    td.select_X = inliers.X.select_rows(sp.select);
    td.select_y.assign(sp.select.size(), 0.0);
    td.cal_X = inliers.X.select_rows(sp.calibrate);
    td.cal_y.assign(sp.calibrate.size(), 0.0);

    const auto n_out_test = static_cast<std::size_t>(std::lround(test_n * f));
    const Dataset test =
        synth_outliers(test_n - n_out_test, n_out_test, derive_seed(trial_seed, 4));
    td.test_X = test.X;
    td.test_y = test.y;
    return td;
  }

  Dataset pool;
  Dataset test;
  if (cfg.data.has_value()) {
    const Dataset& full = *cfg.data;
    if (full.size() < cfg.n + test_n) {
      throw std::invalid_argument("run_pipeline: dataset too small for n + test_size");
    }
    Rng rng(derive_seed(trial_seed, 5));
    const auto perm = rng.permutation(full.size());
    std::vector<std::size_t> test_idx(perm.begin(), perm.begin() + test_n);
    std::vector<std::size_t> pool_idx(perm.begin() + test_n, perm.begin() + test_n + cfg.n);
    test.X = full.X.select_rows(test_idx);
    test.y = select_values(full.y, test_idx);
    pool.X = full.X.select_rows(pool_idx);
    pool.y = select_values(full.y, pool_idx);
  } else {
    switch (cfg.task) {
      case Task::classification:
        pool = synth_classification(cfg.n, cfg.classes, derive_seed(trial_seed, 6));
        test = synth_classification(test_n, cfg.classes, derive_seed(trial_seed, 7));
        break;
      case Task::regression:
      case Task::quantile:
        pool = synth_regression(cfg.n, derive_seed(trial_seed, 6), cfg.synth);
        test = synth_regression(test_n, derive_seed(trial_seed, 7), cfg.synth);
        break;
      case Task::outlier:
        break;  // handled above
    }
  }

  const auto sp = make_splits(cfg.n, {mode, derive_seed(trial_seed, 8)});
  if (cfg.data.has_value() && cfg.standardize) {
    Standardizer st;
    st.fit(pool.X, sp.train);
    st.apply(pool.X);
    st.apply(test.X);
  }
  if (cfg.data.has_value() && cfg.rescale_response &&
      (cfg.task == Task::regression || cfg.task == Task::quantile)) {
    const double s = response_scale(pool.y, sp.train);
    for (double& v : pool.y) v /= s;
    for (double& v : test.y) v /= s;
  }

  td.train_X = pool.X.select_rows(sp.train);
  td.train_y = select_values(pool.y, sp.train);
  td.select_X = pool.X.select_rows(sp.select);
  td.select_y = select_values(pool.y, sp.select);
  td.cal_X = pool.X.select_rows(sp.calibrate);
  td.cal_y = select_values(pool.y, sp.calibrate);
  td.test_X = test.X;
  td.test_y = test.y;
  return td;
}

struct TrainedTrial {
  CheckpointStore store;
  EsCalSet escal;  // built on the calibration rows
  std::size_t fixed_model = 0;  // data_splitting / full_training
  double working_alpha = 0.0;   // 0 means "never reject / infinite interval"
};

LossKind loss_for_task(const PipelineConfig& cfg) {
  switch (cfg.task) {
    case Task::outlier: return LossKind::cross_entropy(2);
    case Task::classification: return LossKind::cross_entropy(cfg.classes);
    case Task::regression: return LossKind::squared_error();
    case Task::quantile: return LossKind::pinball_pair(cfg.alpha / 2.0, 1.0 - cfg.alpha / 2.0);
  }
  return LossKind::squared_error();
}

NetworkSpec spec_for_task(const PipelineConfig& cfg, std::size_t input_dim, std::uint64_t seed) {
  NetworkSpec spec;
  spec.layer_sizes.push_back(input_dim);
  for (std::size_t h : cfg.hidden) spec.layer_sizes.push_back(h);
  switch (cfg.task) {
    case Task::outlier: spec.layer_sizes.push_back(2); break;
    case Task::classification: spec.layer_sizes.push_back(cfg.classes); break;
    case Task::regression: spec.layer_sizes.push_back(1); break;
    case Task::quantile:
      spec.layer_sizes.push_back(2);
      spec.output_heads = 2;
      break;
  }
  spec.seed = seed;
  return spec;
}

CheckpointStore single_model_store(const CheckpointStore& store, std::size_t t) {
  CheckpointStore out;
  out.loss = store.loss;
  out.config = store.config;
  out.checkpoints.push_back(store.checkpoints[t]);
  return out;
}

TrainedTrial train_trial(const PipelineConfig& cfg, Method method, const TrialData& td,
                         std::uint64_t trial_seed) {
  TrainedTrial tt;
  const LossKind loss = loss_for_task(cfg);
  const NetworkSpec spec = spec_for_task(cfg, td.train_X.cols, derive_seed(trial_seed, 9));
  TrainConfig tc;
  tc.t_max = cfg.t_max;
  tc.tau = cfg.tau;
  tc.optimizer = cfg.optimizer;
  tc.batch_size = cfg.batch_size;
  tc.weight_decay = cfg.weight_decay;
  tc.seed = derive_seed(trial_seed, 10);
  CheckpointStore full = train_with_snapshots(td.train_X, td.train_y, spec, loss, tc);

  const std::uint64_t u_seed = derive_seed(trial_seed, 11);
  tt.working_alpha = cfg.alpha;
  switch (method) {
    case Method::ces:
    case Method::naive: {
      tt.store = std::move(full);
      tt.escal = make_escal_set(tt.store, td.cal_X, td.cal_y, u_seed);
      break;
    }
    case Method::naive_corrected: {
      tt.store = std::move(full);
      tt.escal = make_escal_set(tt.store, td.cal_X, td.cal_y, u_seed);
      BoundInputs bi;
      bi.T = static_cast<int>(tt.store.size());
      bi.n = static_cast<int>(tt.escal.size());
      bi.alpha = cfg.alpha;
      tt.working_alpha = corrected_level(cfg.alpha, bi);
      break;
    }
    case Method::data_splitting: {
      // greedy early stopping on the selection rows, calibration on fresh rows
      EsCalSet sel = make_escal_set(full, td.select_X, td.select_y, derive_seed(trial_seed, 12));
      const std::size_t t_star = greedy_model_index(sel);
      tt.store = single_model_store(full, t_star);
      tt.fixed_model = t_star;
      tt.escal = make_escal_set(tt.store, td.cal_X, td.cal_y, u_seed);
      break;
    }
    case Method::full_training: {
      tt.store = single_model_store(full, full.size() - 1);
      tt.fixed_model = full.size() - 1;
      tt.escal = make_escal_set(tt.store, td.cal_X, td.cal_y, u_seed);
      break;
    }
  }
  return tt;
}

MetricsRow evaluate_trial(const PipelineConfig& cfg, Method method, const TrialData& td,
                          const TrainedTrial& tt, std::uint64_t trial_seed) {
  MetricsRow row;
  row.method = method_name(method);
  row.sample_size = cfg.n;
  row.trial_seed = trial_seed;
  const std::size_t n_test = td.test_X.rows;
  const bool vacuous = tt.working_alpha <= 0.0;
  const bool per_test_selection = method == Method::ces;

  switch (cfg.task) {
    case Task::outlier: {
      std::size_t rej_out = 0, n_out = 0, rej_in = 0, n_in = 0;
      for (std::size_t i = 0; i < n_test; ++i) {
        const bool is_outlier = td.test_y[i] > 0.5;
        bool reject = false;
        if (!vacuous) {
          const std::uint64_t noise_seed = derive_seed(trial_seed, 13, i);
          const double pv =
              per_test_selection
                  ? ces_outlier_pvalue(tt.store, tt.escal, td.test_X.row_span(i), noise_seed)
                  : naive_outlier_pvalue(tt.store, tt.escal, td.test_X.row_span(i), noise_seed);
          reject = pv <= tt.working_alpha;
        }
        if (is_outlier) {
          ++n_out;
          rej_out += reject;
        } else {
          ++n_in;
          rej_in += reject;
        }
      }
      row.tpr = n_out ? static_cast<double>(rej_out) / n_out : std::nan("");
      row.fpr = n_in ? static_cast<double>(rej_in) / n_in : std::nan("");
      return row;
    }
    case Task::classification: {
      std::vector<std::uint8_t> covered(n_test, 0);
      double total_card = 0.0;
      for (std::size_t i = 0; i < n_test; ++i) {
        const int truth = static_cast<int>(td.test_y[i]);
        if (vacuous) {
          covered[i] = 1;
          total_card += cfg.classes;
          continue;
        }
        const std::uint64_t u_seed = derive_seed(trial_seed, 14, i);
        const LabelSetResult set =
            per_test_selection
                ? ces_classification_set(tt.store, tt.escal, td.test_X.row_span(i),
                                         tt.working_alpha, cfg.class_mode, u_seed)
                : naive_classification_set(tt.store, tt.escal, td.test_X.row_span(i),
                                           tt.working_alpha, cfg.class_mode, u_seed);
        covered[i] = std::find(set.labels.begin(), set.labels.end(), truth) != set.labels.end();
        total_card += static_cast<double>(set.labels.size());
      }
      double cov = 0.0;
      for (auto c : covered) cov += c;
      row.marginal_coverage = cov / static_cast<double>(n_test);
      row.mean_size = total_card / static_cast<double>(n_test);
      if (n_test >= 50) {
        row.conditional_coverage = wsc_coverage(td.test_X, covered, cfg.wsc_delta,
                                                cfg.wsc_directions, cfg.wsc_split,
                                                derive_seed(trial_seed, 15));
      }
      return row;
    }
    case Task::regression:
    case Task::quantile: {
      std::vector<std::uint8_t> covered(n_test, 0);
      double total_width = 0.0;
      for (std::size_t i = 0; i < n_test; ++i) {
        Interval iv;
        if (vacuous) {
          iv = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                false, false};
        } else if (cfg.task == Task::regression) {
          iv = per_test_selection ? ces_regression_interval_nonempty(
                                        tt.store, tt.escal, td.test_X.row_span(i), tt.working_alpha)
                                  : naive_regression_interval(tt.store, tt.escal,
                                                              td.test_X.row_span(i),
                                                              tt.working_alpha);
        } else {
          iv = per_test_selection
                   ? ces_cqr_interval_nonempty(tt.store, tt.escal, td.test_X.row_span(i),
                                               tt.working_alpha)
                   : naive_cqr_interval(tt.store, tt.escal, td.test_X.row_span(i),
                                        tt.working_alpha);
        }
        covered[i] = iv.contains(td.test_y[i]);
        total_width += iv.width();
      }
      double cov = 0.0;
      for (auto c : covered) cov += c;
      row.marginal_coverage = cov / static_cast<double>(n_test);
      row.mean_size = total_width / static_cast<double>(n_test);
      if (n_test >= 50) {
        row.conditional_coverage = wsc_coverage(td.test_X, covered, cfg.wsc_delta,
                                                cfg.wsc_directions, cfg.wsc_split,
                                                derive_seed(trial_seed, 15));
      }
      return row;
    }
  }
  return row;
}

int worker_count(int trials) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("CES_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::min(n, trials);
}

}  // namespace

std::vector<MetricsRow> run_pipeline(const PipelineConfig& cfg, Method method) {
  if (cfg.trials < 1) throw std::invalid_argument("run_pipeline: trials >= 1 required");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("run_pipeline: alpha in (0,1)");
  }
  if (cfg.task == Task::classification && cfg.data.has_value()) {
    for (double v : cfg.data->y) {
      const int label = static_cast<int>(v);
      if (label < 0 || label >= cfg.classes || static_cast<double>(label) != v) {
        throw std::invalid_argument("run_pipeline: labels must be integers in [0, classes)");
      }
    }
  }

  std::vector<MetricsRow> rows(cfg.trials);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    while (true) {
      const int trial = next.fetch_add(1);
      if (trial >= cfg.trials) return;
      try {
        const std::uint64_t trial_seed =
            derive_seed(cfg.seed, 0x7a1aULL + static_cast<std::uint64_t>(trial));
        const TrialData td = make_trial_data(cfg, method, trial_seed);
        const TrainedTrial tt = train_trial(cfg, method, td, trial_seed);
        rows[trial] = evaluate_trial(cfg, method, td, tt, trial_seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const int workers = worker_count(cfg.trials);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace ces
