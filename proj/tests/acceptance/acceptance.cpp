// Acceptance run: one PASS/FAIL line per criterion. Exit code is nonzero when any hard criterion fails;
// criterion 10 is reported (and flagged on failure) but does not affect the exit code.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qkern/circuits.hpp"
#include "qkern/harness.hpp"
#include "qkern/hmm.hpp"
#include "qkern/kernels.hpp"
#include "qkern/learn.hpp"
#include "qkern/linalg.hpp"
#include "qkern/metrics.hpp"
#include "qkern/qhmm.hpp"
#include "qkern/tasks.hpp"

using namespace qkern;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<Sequence> all_sequences(const std::string& alphabet, int length) {
  std::vector<Sequence> out{""};
  for (int i = 0; i < length; ++i) {
    std::vector<Sequence> next;
    for (const auto& s : out)
      for (char a : alphabet) next.push_back(s + a);
    out = std::move(next);
  }
  return out;
}

// Row-stochastic forward algorithm straight from the transition/emission tables.
double table_forward(const Sequence& y) {
  const double a[4][4] = {{.5, .1, .15, .25}, {.1, .5, .25, .15}, {.25, .15, .5, .1}, {.15, .25, .1, .5}};
  const double b[4][2] = {{.8, .2}, {.2, .8}, {.4, .6}, {.6, .4}};
  double alpha[4] = {.25, .25, .25, .25};
  for (char c : y) {
    const int s = c - '0';
    double next[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) next[j] += alpha[i] * b[i][s] * a[i][j];
    std::copy(next, next + 4, alpha);
  }
  return alpha[0] + alpha[1] + alpha[2] + alpha[3];
}

std::vector<Sequence> market_sample(std::size_t n, int length, std::uint64_t seed) {
  const auto m = hmm::market4();
  Rng rng = derive_rng(seed, 0);
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(hmm::sample(m, length, rng));
  return out;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto q = qhmm::embed_hmm(hmm::market4());
  double worst = 0.0;
  std::size_t count = 0;
  for (int len = 1; len <= 8; ++len) {
    for (const auto& y : all_sequences("01", len)) {
      worst = std::max(worst, std::abs(qhmm::sequence_probability(q, y) - table_forward(y)));
      ++count;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 10.0, std::to_string(count) + " sequences, max_abs_err=" + fmt("%.3g", worst) +
                                          ", time=" + fmt("%.2fs", t)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Rng rng = derive_rng(2002, i);
    std::uniform_int_distribution<std::size_t> pick(2, 4);
    const auto n = pick(rng), m = pick(rng);
    const auto u = qhmm::random_qhmm(n, m, "01", {}, rng);
    const auto q = qhmm::kraus_from_unitary(u);
    const auto exact = qhmm::enumerate_distribution(q, q.initial(), 4);
    const auto shots = circuits::run_trajectories(u, 4, 100'000, rng);
    worst = std::max(worst, metrics::total_variation(shots.empirical(4), exact));
  }
  const double t = seconds_since(t0);
  return {worst <= 0.02 && t < 120.0, "20 models, max sup-TV=" + fmt("%.4f", worst) + ", time=" + fmt("%.1fs", t)};
}

Outcome criterion3() {
  std::size_t v1 = 0, v2 = 0;
  double m1 = 1e300, m2 = 1e300;
  for (std::size_t i = 0; i < 200; ++i) {
    Rng rng = derive_rng(3003, i);
    std::uniform_int_distribution<std::size_t> pick(2, 4);
    std::uniform_int_distribution<int> pick_k(1, 4);
    const auto n = pick(rng), m = pick(rng);
    const int k = pick_k(rng);
    const auto q = qhmm::kraus_from_unitary(qhmm::random_qhmm(n, m, "01", {}, rng));
    const auto r1 = qhmm::random_density(n, rng), r2 = qhmm::random_density(n, rng);
    const auto c = metrics::check_proposition1(q, r1, r2, k);
    v1 += !c.holds;
    m1 = std::min(m1, c.rhs - c.lhs);
  }
  const auto q = qhmm::embed_hmm(hmm::market4());
  const tasks::Labeler task{tasks::TaskKind::Predictive};
  const metrics::ClassLabeler label = [&task](const Sequence& y) { return task(y); };
  const auto seqs = market_sample(200, 8, 3004);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto c = metrics::check_proposition2(q, label, seqs[2 * i], seqs[2 * i + 1], 3);
    v2 += !c.holds;
    m2 = std::min(m2, c.rhs - c.lhs);
  }
  return {v1 == 0 && v2 == 0, "prop1 200 instances violations=" + std::to_string(v1) + " worst_margin=" +
                                  fmt("%.3g", m1) + "; prop2 100 pairs k=3 violations=" + std::to_string(v2) +
                                  " worst_margin=" + fmt("%.3g", m2)};
}

Outcome criterion4() {
  bool symmetric = true, fidelity_ok = true;
  double worst_slack = 1e300, worst_unitary = 0.0, worst_self = 0.0, worst_bures_same = 0.0, worst_bures_orth = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    Rng rng = derive_rng(4004, i);
    std::uniform_int_distribution<std::size_t> pick(2, 8);
    const auto d = pick(rng);
    const auto a = qhmm::random_density(d, rng), b = qhmm::random_density(d, rng), c = qhmm::random_density(d, rng);
    const double ab = metrics::trace_distance(a, b);
    symmetric = symmetric && ab == metrics::trace_distance(b, a);
    worst_slack = std::min(worst_slack, ab + metrics::trace_distance(b, c) - metrics::trace_distance(a, c));
    const auto u = qhmm::haar_unitary(d, rng);
    const auto conj = [&u](const qhmm::DensityOperator& r) {
      return qhmm::DensityOperator::trusted(linalg::matmul(linalg::matmul(u, r.matrix()), linalg::adjoint(u)));
    };
    worst_unitary = std::max(worst_unitary, std::abs(metrics::trace_distance(conj(a), conj(b)) - ab));
    const double f = metrics::fidelity(a, b);
    fidelity_ok = fidelity_ok && f >= 0.0 && f <= 1.0;
    worst_self = std::max(worst_self, std::abs(metrics::fidelity(a, a) - 1.0));
    worst_bures_same = std::max(worst_bures_same, std::abs(metrics::bures(a, a)));
    const auto psi = circuits::PureState::random(d, rng);
    // Orthogonal partner: Gram-Schmidt a second random vector against psi.
    auto phi = circuits::PureState::random(d, rng).amplitudes();
    linalg::Complex overlap = 0.0;
    for (std::size_t k = 0; k < d; ++k) overlap += std::conj(psi.amplitudes()[k]) * phi[k];
    double norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      phi[k] -= overlap * psi.amplitudes()[k];
      norm += std::norm(phi[k]);
    }
    for (auto& x : phi) x /= std::sqrt(norm);
    const auto rp = qhmm::DensityOperator::pure(psi.amplitudes());
    const auto rq = qhmm::DensityOperator::pure(phi);
    worst_bures_orth = std::max(worst_bures_orth, std::abs(metrics::bures(rp, rq) - 2.0));
  }
  const bool pass = symmetric && worst_slack >= -1e-9 && worst_unitary <= 1e-10 && fidelity_ok &&
                    worst_self <= 1e-10 && worst_bures_same <= 1e-9 && worst_bures_orth <= 1e-9;
  return {pass, std::string("symmetry_exact=") + (symmetric ? "yes" : "no") + " triangle_min_slack=" +
                    fmt("%.3g", worst_slack) + " unitary_dev=" + fmt("%.3g", worst_unitary) +
                    " fidelity_in_range=" + (fidelity_ok ? "yes" : "no") + " F(r,r)_dev=" + fmt("%.3g", worst_self) +
                    " bures_same=" + fmt("%.3g", worst_bures_same) + " bures_orth_dev=" +
                    fmt("%.3g", worst_bures_orth)};
}

Outcome criterion5() {
  const auto q = qhmm::embed_hmm(hmm::market4());
  const auto seqs = market_sample(100, 8, 5005);
  bool pass = true;
  std::string detail;
  for (const char* id : {"predictive:trace", "structural:trace"}) {
    const auto g = kernels::gram(q, kernels::KernelSpec::parse(id), seqs);
    double diag = 0.0;
    for (Eigen::Index i = 0; i < g.values.rows(); ++i) diag = std::max(diag, std::abs(g.values(i, i) - 1.0));
    pass = pass && g.min_eigenvalue_raw >= -1e-8 && diag <= 1e-9;
    detail += std::string(detail.empty() ? "" : "; ") + id + " min_eig=" + fmt("%.3g", g.min_eigenvalue_raw) +
              " diag_dev=" + fmt("%.3g", diag);
  }
  return {pass, detail};
}

Outcome criterion6() {
  constexpr std::size_t kEstimates = 1000, kShots = 1000;
  std::size_t within = 0;
  double worst_z = 0.0;
  for (int i = 0; i < 20; ++i) {
    Rng rng = derive_rng(6006, i);
    std::uniform_int_distribution<std::size_t> pick(2, 8);
    const auto d = pick(rng);
    const auto psi = circuits::PureState::random(d, rng), phi = circuits::PureState::random(d, rng);
    linalg::Complex overlap = 0.0;
    for (std::size_t k = 0; k < d; ++k) overlap += std::conj(phi.amplitudes()[k]) * psi.amplitudes()[k];
    const double exact = std::norm(overlap);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r = 0; r < kEstimates; ++r) {
      const double e = circuits::swap_test(psi, phi, kShots, rng);
      sum += e;
      sumsq += e * e;
    }
    const double mean = sum / kEstimates;
    const double var = (sumsq - kEstimates * mean * mean) / (kEstimates - 1);
    const double se = std::sqrt(var / kEstimates);
    const double z = std::abs(mean - exact) / se;
    worst_z = std::max(worst_z, z);
    within += z <= 3.0;
  }
  Rng rng = derive_rng(6006, 99);
  const auto psi = circuits::PureState::random(5, rng);
  const double same = circuits::swap_test(psi, psi, kShots, rng);
  return {within == 20 && same == 1.0, std::to_string(within) + "/20 pairs within 3 SE (worst " +
                                           fmt("%.2f", worst_z) + " SE); identical pair estimate=" +
                                           fmt("%.17g", same)};
}

Outcome criterion7() {
  std::size_t good = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Rng rng = derive_rng(7007, i);
    const auto rho = qhmm::random_density(2, rng);
    const auto est = circuits::reconstruct_density(circuits::pauli_expectations(rho, 10'000, rng));
    const auto diff = est.matrix() - rho.matrix();
    double f = 0.0;
    for (const auto& x : diff.data()) f += std::norm(x);
    f = std::sqrt(f);
    worst = std::max(worst, f);
    good += f <= 0.05;
  }
  return {good >= 48, std::to_string(good) + "/50 within Frobenius 0.05 (worst " + fmt("%.4f", worst) + ")"};
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  const auto q = qhmm::embed_hmm(hmm::market4());
  learn::Protocol protocol;
  protocol.n = 500;
  protocol.split = 0.5;
  protocol.reps = 100;
  protocol.length = 8;
  protocol.seed = 8008;
  const auto rbf = kernels::KernelSpec::parse("rbf");
  bool pass = true;
  std::string detail;
  struct Case {
    tasks::TaskKind kind;
    const char* kernel;
  };
  for (const Case c : {Case{tasks::TaskKind::Predictive, "predictive:trace"},
                       Case{tasks::TaskKind::Structural, "structural:trace"}}) {
    const tasks::Labeler task{c.kind};
    const auto quantum = kernels::KernelSpec::parse(c.kernel);
    const auto result = learn::evaluate(q, task, {quantum, rbf}, protocol);
    const auto& qr = result.find("SVC", quantum.id());
    const auto& cr = result.find("SVC", rbf.id());
    const double wins = learn::paired_win_fraction(qr, cr);
    pass = pass && wins >= 0.7;
    detail += std::string(detail.empty() ? "" : "; ") + task.name() + ": " + c.kernel + " out=" +
              fmt("%.3f", qr.out_sample_accuracy) + " rbf out=" + fmt("%.3f", cr.out_sample_accuracy) +
              " wins=" + fmt("%.2f", wins);
    if (c.kind == tasks::TaskKind::Predictive) {
      const bool vicinity = std::abs(cr.out_sample_accuracy - 0.916) <= 0.08;
      pass = pass && vicinity;
      detail += std::string(" rbf_vicinity(0.916+-0.08)=") + (vicinity ? "yes" : "no");
    }
  }
  const double t = seconds_since(t0);
  pass = pass && t < 900.0;
  return {pass, detail + "; time=" + fmt("%.1fs", t)};
}

Outcome criterion9() {
  const auto q = qhmm::embed_hmm(hmm::market4());
  const auto seqs = all_sequences("01", 4);
  const auto pg = circuits::projected_kernel_matrix_exact(q, seqs, 1.0);
  std::vector<int> cls;
  for (const auto& y : seqs) {
    const auto next = qhmm::conditional_next_distribution(q, y);
    cls.push_back(next.at('1') > next.at('0') ? 1 : 0);
  }
  double within = 0.0, cross = 0.0;
  std::size_t nw = 0, nc = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      if (i == j) continue;
      const double v = pg.gram.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (cls[i] == cls[j]) {
        within += v;
        ++nw;
      } else {
        cross += v;
        ++nc;
      }
    }
  }
  within /= static_cast<double>(nw);
  cross /= static_cast<double>(nc);
  return {pg.skipped.empty() && within > cross,
          "within-class mean=" + fmt("%.6f", within) + " cross-class mean=" + fmt("%.6f", cross)};
}

Outcome criterion10() {
  const auto sample = market_sample(50, 8, 1010);
  const auto study = harness::dimension_study(kernels::KernelSpec::parse("predictive:trace"), {2, 4, 16}, 20, sample,
                                              1010, 20);
  std::string detail = "mean distance";
  for (const auto& s : study.per_dim) detail += " N=" + std::to_string(s.dim) + ":" + fmt("%.4f", s.mean_distance);
  return {study.mean_nondecreasing, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
    bool hard;
  };
  const std::vector<Criterion> criteria{
      {1, "embedding matches classical forward algorithm", criterion1, true},
      {2, "trajectory sampling matches Kraus channel", criterion2, true},
      {3, "divergence bounds hold on random instances", criterion3, true},
      {4, "metric axioms", criterion4, true},
      {5, "Gram validity", criterion5, true},
      {6, "SWAP-test estimator", criterion6, true},
      {7, "tomography round trip", criterion7, true},
      {8, "classification protocol", criterion8, true},
      {9, "projected-kernel class separation", criterion9, true},
      {10, "distance grows with hidden dimension", criterion10, false},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::string tag = o.pass ? "PASS" : "FAIL";
    if (!o.pass && !c.hard) tag += " (flagged for investigation, non-fatal)";
    std::printf("criterion %2d %s: %s: %s\n", c.number, tag.c_str(), c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && c.hard) ++failures;
  }
  std::printf("%d hard criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
