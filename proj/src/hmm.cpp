#include "qkern/hmm.hpp"

#include <cmath>
#include <stdexcept>

namespace qkern::hmm {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_columns_stochastic(const RealMatrix& m, const char* what) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (m(r, c) < 0.0 || !std::isfinite(m(r, c))) {
        throw std::invalid_argument(std::string(what) + ": entries must be finite and non-negative");
      }
      s += m(r, c);
    }
    if (std::abs(s - 1.0) > kStochasticTol) {
      throw std::invalid_argument(std::string(what) + ": column " + std::to_string(c) + " sums to " +
                                  std::to_string(s));
    }
  }
}

// Draws an index from a discrete distribution given as weights summing to ~1.
template <typename Weight>
std::size_t draw(Rng& rng, std::size_t count, Weight weight) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = weight(i);
    if (w > 0.0) last_positive = i;
    acc += w;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

ClassicalHmm::ClassicalHmm(std::string alphabet, RealMatrix transition, RealMatrix emission, BeliefVector initial)
    : alphabet_(std::move(alphabet)),
      transition_(std::move(transition)),
      emission_(std::move(emission)),
      initial_(std::move(initial)) {
  const std::size_t n = initial_.size();
  if (n == 0) throw std::invalid_argument("ClassicalHmm: at least one state required");
  if (alphabet_.empty()) throw std::invalid_argument("ClassicalHmm: empty alphabet");
  if (transition_.rows() != n || transition_.cols() != n) {
    throw std::invalid_argument("ClassicalHmm: transition must be n x n");
  }
  if (emission_.rows() != alphabet_.size() || emission_.cols() != n) {
    throw std::invalid_argument("ClassicalHmm: emission must be |alphabet| x n");
  }
  check_columns_stochastic(transition_, "ClassicalHmm transition");
  check_columns_stochastic(emission_, "ClassicalHmm emission");
  RealMatrix x0(n, 1);
  for (std::size_t i = 0; i < n; ++i) x0(i, 0) = initial_[i];
  check_columns_stochastic(x0, "ClassicalHmm initial");
}

ClassicalHmm ClassicalHmm::from_rows(std::string alphabet, const std::vector<std::vector<double>>& transition_rows,
                                     const std::vector<std::vector<double>>& emission_rows, BeliefVector initial) {
  const std::size_t n = transition_rows.size();
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (transition_rows[i].size() != n) throw std::invalid_argument("transition rows must have n entries");
    for (std::size_t j = 0; j < n; ++j) a(j, i) = transition_rows[i][j];
  }
  if (emission_rows.size() != n) throw std::invalid_argument("emission must have one row per state");
  RealMatrix b(alphabet.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    if (emission_rows[i].size() != alphabet.size()) {
      throw std::invalid_argument("emission rows must have one entry per symbol");
    }
    for (std::size_t s = 0; s < alphabet.size(); ++s) b(s, i) = emission_rows[i][s];
  }
  return ClassicalHmm(std::move(alphabet), std::move(a), std::move(b), std::move(initial));
}

std::size_t ClassicalHmm::symbol_index(char a) const {
  const auto pos = alphabet_.find(a);
  if (pos == std::string::npos) throw std::invalid_argument(std::string("unknown symbol '") + a + "'");
  return pos;
}

ClassicalHmm market4() {
  // Bear, Bull, Transition-to-Bear, Transition-to-Bull.
  return ClassicalHmm::from_rows("01",
                                 {{0.50, 0.10, 0.15, 0.25},
                                  {0.10, 0.50, 0.25, 0.15},
                                  {0.25, 0.15, 0.50, 0.10},
                                  {0.15, 0.25, 0.10, 0.50}},
                                 {{0.80, 0.20}, {0.20, 0.80}, {0.40, 0.60}, {0.60, 0.40}},
                                 {0.25, 0.25, 0.25, 0.25});
}

RealMatrix observable_operator(const ClassicalHmm& model, char a) {
  const std::size_t s = model.symbol_index(a);
  const std::size_t n = model.n_states();
  RealMatrix t(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) t(j, i) = model.transition()(j, i) * model.emission()(s, i);
  return t;
}

namespace {

BeliefVector step(const ClassicalHmm& model, const BeliefVector& x, std::size_t s) {
  const std::size_t n = model.n_states();
  BeliefVector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = x[i] * model.emission()(s, i);
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) out[j] += model.transition()(j, i) * w;
  }
  return out;
}

double sum(const BeliefVector& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

void enumerate(const ClassicalHmm& model, const BeliefVector& x, Sequence& prefix, int remaining,
               SequenceDistribution& out) {
  if (remaining == 0) {
    out.probs.emplace(prefix, sum(x));
    return;
  }
  for (std::size_t s = 0; s < model.alphabet().size(); ++s) {
    prefix.push_back(model.alphabet()[s]);
    enumerate(model, step(model, x, s), prefix, remaining - 1, out);
    prefix.pop_back();
  }
}

}  // namespace

BeliefVector feature_map(const ClassicalHmm& model, const Sequence& y) {
  BeliefVector x = model.initial();
  for (char a : y) x = step(model, x, model.symbol_index(a));
  return x;
}

double sequence_probability(const ClassicalHmm& model, const Sequence& y) { return sum(feature_map(model, y)); }

SequenceDistribution enumerate_distribution(const ClassicalHmm& model, int length) {
  check_enumeration(model.alphabet().size(), length);
  SequenceDistribution out;
  out.length = length;
  Sequence prefix;
  enumerate(model, model.initial(), prefix, length, out);
  return out;
}

std::pair<BeliefVector, double> belief_update(const ClassicalHmm& model, const BeliefVector& belief, char a) {
  if (belief.size() != model.n_states()) throw std::invalid_argument("belief_update: belief has wrong length");
  BeliefVector next = step(model, belief, model.symbol_index(a));
  const double p = sum(next);
  if (p <= kImpossibleThreshold) {
    throw ImpossibleSequenceError(std::string("symbol '") + a + "' is impossible under this belief", Sequence(1, a));
  }
  for (double& v : next) v /= p;
  return {std::move(next), p};
}

Sequence sample(const ClassicalHmm& model, int length, Rng& rng) {
  if (length < 0) throw std::invalid_argument("sample: negative length");
  const std::size_t n = model.n_states();
  const std::size_t m = model.alphabet().size();
  std::size_t state = draw(rng, n, [&](std::size_t i) { return model.initial()[i]; });
  Sequence y;
  y.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    const std::size_t s = draw(rng, m, [&](std::size_t a) { return model.emission()(a, state); });
    y.push_back(model.alphabet()[s]);
    state = draw(rng, n, [&](std::size_t j) { return model.transition()(j, state); });
  }
  return y;
}

ClassicalHmm from_json(const nlohmann::json& j) {
  const auto alphabet = j.at("alphabet").get<std::string>();
  const auto transition = j.at("transition").get<std::vector<std::vector<double>>>();
  const auto emission = j.at("emission").get<std::vector<std::vector<double>>>();
  BeliefVector initial;
  if (j.contains("initial")) {
    initial = j.at("initial").get<BeliefVector>();
  } else {
    initial.assign(transition.size(), 1.0 / static_cast<double>(transition.size()));
  }
  if (j.contains("states") && j.at("states").get<std::size_t>() != transition.size()) {
    throw std::invalid_argument("model file: 'states' does not match the transition matrix");
  }
  return ClassicalHmm::from_rows(alphabet, transition, emission, std::move(initial));
}

nlohmann::json to_json(const ClassicalHmm& model) {
  const std::size_t n = model.n_states();
  std::vector<std::vector<double>> transition(n, std::vector<double>(n));
  std::vector<std::vector<double>> emission(n, std::vector<double>(model.alphabet().size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) transition[i][j] = model.transition()(j, i);
    for (std::size_t s = 0; s < model.alphabet().size(); ++s) emission[i][s] = model.emission()(s, i);
  }
  return {{"states", n},
          {"alphabet", model.alphabet()},
          {"transition", transition},
          {"emission", emission},
          {"initial", model.initial()}};
}

}  // namespace qkern::hmm
