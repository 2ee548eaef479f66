#include "qkern/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qkern::learn {

namespace {

constexpr double kTau = 1e-12;

bool in_up(double y, double a, double c) { return (y > 0 && a < c) || (y < 0 && a > 0); }
bool in_low(double y, double a, double c) { return (y > 0 && a > 0) || (y < 0 && a < c); }

}  // namespace

SvmModel svm_train(const Eigen::MatrixXd& gram, const std::vector<int>& classes, const SvmOptions& options) {
  const auto n = static_cast<std::size_t>(gram.rows());
  if (gram.rows() != gram.cols() || classes.size() != n) {
    throw std::invalid_argument("svm_train: Gram must be square and match the class vector");
  }
  if (!gram.allFinite()) throw std::invalid_argument("svm_train: Gram contains non-finite entries");
  if (!(options.c_param > 0.0)) throw std::invalid_argument("svm_train: C must be positive");
  std::vector<double> y(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (classes[i] != 0 && classes[i] != 1) throw std::invalid_argument("svm_train: classes must be 0 or 1");
    y[i] = classes[i] == 1 ? 1.0 : -1.0;
    (classes[i] == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("svm_train: training set contains a single class");

  const double c = options.c_param;
  const auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * gram(i, j); };
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  // f = 1/2 a'Qa - e'a = 1/2 sum a_t (G_t - 1); the dual objective is -f.
  const auto primal_f = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return 0.5 * f;
  };

  SvmModel model;
  model.c_param = c;
  double prev_f = 0.0;
  long iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(y[t], alpha[t], c) && -y[t] * grad[t] > g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
    }
    for (std::size_t t = 0; t < n; ++t)
      if (in_low(y[t], alpha[t], c)) g_min = std::min(g_min, -y[t] * grad[t]);
    model.kkt_gap = g_max - g_min;
    if (i == n || model.kkt_gap < options.tolerance) {
      model.converged = true;
      break;
    }
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(y[t], alpha[t], c)) continue;
      const double b = g_max + y[t] * grad[t];
      if (b <= 0.0) continue;
      double a = gram(i, i) + gram(t, t) - 2.0 * gram(i, t);
      if (a <= 0.0) a = kTau;
      const double score = -(b * b) / a;
      if (score < best) {
        best = score;
        j = t;
      }
    }
    if (j == n) {
      model.converged = true;
      break;
    }

    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
    for (std::size_t t : {i, j})
      if (alpha[t] < 0.0 || alpha[t] > c) model.box_respected = false;

    const double f = primal_f();
    if (f > prev_f + 1e-12 * std::max(1.0, std::abs(prev_f))) model.objective_monotone = false;
    prev_f = f;
  }
  model.iterations = iter;

  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  model.bias = -rho;
  model.dual_coefficients.resize(n);
  model.train_refs.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    model.dual_coefficients[t] = alpha[t] * y[t];
    model.train_refs[t] = t;
    if (alpha[t] > 0.0) model.support_indices.push_back(t);
  }
  return model;
}

double svm_decision(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& kernel_row) {
  if (static_cast<std::size_t>(kernel_row.size()) != model.dual_coefficients.size()) {
    throw std::invalid_argument("svm_predict: kernel row length does not match the training set");
  }
  double s = model.bias;
  for (std::size_t t : model.support_indices) s += model.dual_coefficients[t] * kernel_row(static_cast<Eigen::Index>(t));
  return s;
}

int svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& kernel_row) {
  return svm_decision(model, kernel_row) > 0.0 ? 1 : 0;
}

double dual_objective(const SvmModel& model, const Eigen::MatrixXd& gram) {
  const auto& d = model.dual_coefficients;
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    linear += std::abs(d[i]);
    for (std::size_t j = 0; j < d.size(); ++j) quad += d[i] * d[j] * gram(i, j);
  }
  return linear - 0.5 * quad;
}

int knn_classify(const std::vector<double>& distances_to_train, const std::vector<int>& train_classes, std::size_t k) {
  if (distances_to_train.empty()) throw std::invalid_argument("knn_classify: empty training set");
  if (distances_to_train.size() != train_classes.size()) {
    throw std::invalid_argument("knn_classify: distances and classes differ in length");
  }
  if (k < 1 || k > distances_to_train.size()) throw std::invalid_argument("knn_classify: k out of range");
  std::vector<std::size_t> order(distances_to_train.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (distances_to_train[a] != distances_to_train[b]) return distances_to_train[a] < distances_to_train[b];
                      return a < b;
                    });
  std::size_t ones = 0;
  for (std::size_t r = 0; r < k; ++r) ones += train_classes[order[r]] == 1;
  return 2 * ones > k ? 1 : 0;
}

double kernel_distance(double kxx, double kyy, double kxy) { return std::sqrt(std::max(0.0, kxx + kyy - 2.0 * kxy)); }

const EvalReport& EvalResult::find(const std::string& classifier, const std::string& kernel) const {
  for (const auto& r : reports)
    if (r.classifier == classifier && r.kernel == kernel) return r;
  throw std::out_of_range("no report for " + classifier + " / " + kernel);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EvalResult evaluate(const qhmm::Qhmm& model, const tasks::Labeler& task, const std::vector<kernels::KernelSpec>& specs,
                    const Protocol& protocol) {
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(protocol.n) * protocol.split));
  if (n_train < 2 || n_train >= protocol.n) throw std::invalid_argument("evaluate: split leaves an empty partition");
  if (protocol.reps == 0) throw std::invalid_argument("evaluate: at least one repetition required");
  const std::size_t n_test = protocol.n - n_train;

  EvalResult result;
  for (const auto& spec : specs) {
    for (const char* clf : {"SVC", "k-NN"}) {
      EvalReport r;
      r.classifier = clf;
      r.kernel = spec.id();
      r.repetitions = protocol.reps;
      r.seed = protocol.seed;
      result.reports.push_back(std::move(r));
    }
  }

  for (std::size_t rep = 0; rep < protocol.reps; ++rep) {
    Rng rng = derive_rng(protocol.seed, rep);
    tasks::LabeledDataset ds;
    for (;;) {
      ds = tasks::generate_dataset(&model, protocol.n, protocol.length, task, rng);
      const auto labels = ds.labels();
      const auto ones = std::count(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_train), 1);
      if (ones > 0 && static_cast<std::size_t>(ones) < n_train) break;
      ++result.resampled;
    }
    const auto seqs = ds.sequences();
    const auto labels = ds.labels();
    const std::vector<int> train_labels(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_train));

    for (std::size_t s = 0; s < specs.size(); ++s) {
      kernels::KernelSpec spec = specs[s];
      if (spec.family == kernels::Family::Rbf && !spec.rbf_sigma) {
        const std::vector<Sequence> train(seqs.begin(), seqs.begin() + static_cast<std::ptrdiff_t>(n_train));
        spec.rbf_sigma = kernels::resolve_sigma(spec, train, model.alphabet());
      }
      const kernels::GramMatrix g = kernels::gram(model, spec, seqs);
      const Eigen::MatrixXd& k = g.values;
      const auto nt = static_cast<Eigen::Index>(n_train);

      SvmOptions opts;
      opts.c_param = protocol.c_param;
      const SvmModel svm = svm_train(k.topLeftCorner(nt, nt), train_labels, opts);

      std::size_t svm_in = 0, svm_out = 0, knn_in = 0, knn_out = 0;
      std::vector<double> dist(n_train);
      for (std::size_t i = 0; i < protocol.n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd row = k.row(ii).head(nt).transpose();
        const bool correct_svm = svm_predict(svm, row) == labels[i];
        for (std::size_t t = 0; t < n_train; ++t) {
          const auto tt = static_cast<Eigen::Index>(t);
          dist[t] = kernel_distance(k(ii, ii), k(tt, tt), k(ii, tt));
        }
        const bool correct_knn = knn_classify(dist, train_labels, std::min(protocol.knn_k, n_train)) == labels[i];
        if (i < n_train) {
          svm_in += correct_svm;
          knn_in += correct_knn;
        } else {
          svm_out += correct_svm;
          knn_out += correct_knn;
        }
      }
      auto& rs = result.reports[2 * s];
      auto& rk = result.reports[2 * s + 1];
      rs.in_per_rep.push_back(static_cast<double>(svm_in) / static_cast<double>(n_train));
      rs.out_per_rep.push_back(static_cast<double>(svm_out) / static_cast<double>(n_test));
      rk.in_per_rep.push_back(static_cast<double>(knn_in) / static_cast<double>(n_train));
      rk.out_per_rep.push_back(static_cast<double>(knn_out) / static_cast<double>(n_test));
    }
  }

  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  for (auto& r : result.reports) {
    r.in_sample_accuracy = mean(r.in_per_rep);
    r.out_sample_accuracy = mean(r.out_per_rep);
    r.in_ci_low = std::min(percentile(r.in_per_rep, 0.025), r.in_sample_accuracy);
    r.in_ci_high = std::max(percentile(r.in_per_rep, 0.975), r.in_sample_accuracy);
    r.out_ci_low = std::min(percentile(r.out_per_rep, 0.025), r.out_sample_accuracy);
    r.out_ci_high = std::max(percentile(r.out_per_rep, 0.975), r.out_sample_accuracy);
  }
  return result;
}

double paired_win_fraction(const EvalReport& a, const EvalReport& b) {
  if (a.out_per_rep.size() != b.out_per_rep.size() || a.out_per_rep.empty()) {
    throw std::invalid_argument("paired_win_fraction: reports are not paired");
  }
  std::size_t wins = 0;
  for (std::size_t i = 0; i < a.out_per_rep.size(); ++i) wins += a.out_per_rep[i] > b.out_per_rep[i];
  return static_cast<double>(wins) / static_cast<double>(a.out_per_rep.size());
}

}  // namespace qkern::learn
