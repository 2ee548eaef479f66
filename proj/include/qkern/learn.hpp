#ifndef QKERN_LEARN_HPP
#define QKERN_LEARN_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qkern/kernels.hpp"
#include "qkern/qhmm.hpp"
#include "qkern/tasks.hpp"

namespace qkern::learn {

struct SvmOptions {
  double c_param = 1.0;
  double tolerance = 1e-3;  ///< stop when the maximal KKT violation gap falls below this
  long max_iterations = 10'000'000;
};

struct SvmModel {
  std::vector<double> dual_coefficients;  ///< alpha_i * y_i, one per training example
  double bias = 0.0;
  std::vector<std::size_t> support_indices;
  double c_param = 1.0;
  std::vector<std::size_t> train_refs;
  double kkt_gap = 0.0;
  long iterations = 0;
  bool converged = false;
  bool objective_monotone = true;  ///< dual objective never decreased between iterations
  bool box_respected = true;  ///< 0 <= alpha <= C held at every iterate
};

/// C-SVC dual solved by SMO with second-order working-set selection.
/// Classes are {0, 1}; throws std::invalid_argument for a single-class set or non-finite Gram.
SvmModel svm_train(const Eigen::MatrixXd& gram, const std::vector<int>& classes, const SvmOptions& options = {});

double svm_decision(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& kernel_row);
int svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& kernel_row);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij for a trained model.
double dual_objective(const SvmModel& model, const Eigen::MatrixXd& gram);

/// Majority among the k nearest; distance ties by index, vote ties toward class 0.
int knn_classify(const std::vector<double>& distances_to_train, const std::vector<int>& train_classes, std::size_t k);

/// sqrt(k(x,x) + k(y,y) - 2 k(x,y)), clamped at 0.
double kernel_distance(double kxx, double kyy, double kxy);

struct Protocol {
  std::size_t n = 500;
  double split = 0.5;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  int length = 8;
  double c_param = 1.0;
  std::size_t knn_k = 5;
};

struct EvalReport {
  std::string classifier;  ///< "SVC" or "k-NN"
  std::string kernel;  ///< KernelSpec::id()
  double in_sample_accuracy = 0.0;
  double out_sample_accuracy = 0.0;
  double in_ci_low = 0.0, in_ci_high = 0.0;
  double out_ci_low = 0.0, out_ci_high = 0.0;
  std::size_t repetitions = 0;
  std::uint64_t seed = 0;
  std::vector<double> in_per_rep;
  std::vector<double> out_per_rep;
};

struct EvalResult {
  std::vector<EvalReport> reports;
  std::size_t resampled = 0;  ///< draws rejected because the training split held a single class

  const EvalReport& find(const std::string& classifier, const std::string& kernel) const;
};

/// Linear-interpolated percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Repeats sample / split / train / score with streams derived from protocol.seed by repetition index.
EvalResult evaluate(const qhmm::Qhmm& model, const tasks::Labeler& task, const std::vector<kernels::KernelSpec>& specs,
                    const Protocol& protocol);

/// Fraction of repetitions in which `a` scores strictly higher out of sample than `b`.
double paired_win_fraction(const EvalReport& a, const EvalReport& b);

}  // namespace qkern::learn

#endif  // QKERN_LEARN_HPP
