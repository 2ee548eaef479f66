#include "qkern/harness.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qkern/circuits.hpp"
#include "qkern/io.hpp"
#include "qkern/learn.hpp"
#include "qkern/metrics.hpp"
#include "qkern/tasks.hpp"

namespace qkern::harness {

using nlohmann::json;

namespace {

/// Raised when a run finishes but a numerical check on its inputs or results failed.
class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

LoadedModel from_unitary(std::string name, qhmm::UnitaryQhmm u) {
  qhmm::Qhmm channel = qhmm::kraus_from_unitary(u);
  return LoadedModel{std::move(name), std::move(channel), std::nullopt, std::move(u)};
}

}  // namespace

LoadedModel load_model(const std::string& ref) {
  if (ref == "market4") {
    auto hmm = hmm::market4();
    return LoadedModel{"market4", qhmm::embed_hmm(hmm), hmm, std::nullopt};
  }
  if (ref.rfind("random:", 0) == 0) {
    const auto parts = split(ref, ':');
    if (parts.size() != 4) throw std::invalid_argument("model: expected random:N:M:seed");
    const auto n = std::stoull(parts[1]);
    const auto m = std::stoull(parts[2]);
    Rng rng = derive_rng(std::stoull(parts[3]), 0);
    return from_unitary(ref, qhmm::random_qhmm(n, m, "01", {}, rng));
  }
  std::ifstream in(ref);
  if (!in) throw std::invalid_argument("model: unknown built-in or unreadable file '" + ref + "'");
  const json j = json::parse(in);
  if (j.contains("unitary")) return from_unitary(ref, qhmm::unitary_from_json(j));
  if (j.contains("channels")) return LoadedModel{ref, qhmm::qhmm_from_json(j), std::nullopt, std::nullopt};
  if (j.contains("transition")) {
    auto hmm = hmm::from_json(j);
    return LoadedModel{ref, qhmm::embed_hmm(hmm), hmm, std::nullopt};
  }
  throw std::invalid_argument("model: JSON has none of 'unitary', 'channels', 'transition'");
}

DimensionStudy dimension_study(const kernels::KernelSpec& spec, const std::vector<std::size_t>& dims,
                               std::size_t models_per_dim, const std::vector<Sequence>& sample, std::uint64_t seed,
                               std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("dimension_study: bins must be positive");
  DimensionStudy study;
  study.kernel = spec.id();
  const double upper = spec.metric == kernels::Metric::Bures ? 2.0 : 1.0;
  for (std::size_t b = 0; b <= bins; ++b) study.edges.push_back(upper * static_cast<double>(b) / bins);

  for (std::size_t d = 0; d < dims.size(); ++d) {
    DimensionStats stats;
    stats.dim = dims[d];
    stats.counts.assign(bins, 0);
    double sum = 0.0;
    std::size_t total = 0, tail = 0;
    for (std::size_t m = 0; m < models_per_dim; ++m) {
      Rng rng = derive_rng(seed, 1 + d * models_per_dim + m);
      const auto u = qhmm::random_qhmm(dims[d], 2, "01", {}, rng);
      const auto q = qhmm::kraus_from_unitary(u);
      const auto dist = kernels::pairwise_distances(q, spec, sample);
      const auto counts = kernels::bin_values(dist, study.edges);
      for (std::size_t b = 0; b < bins; ++b) stats.counts[b] += counts[b];
      for (double v : dist) {
        sum += v;
        if (v > upper / 2) ++tail;
      }
      total += dist.size();
    }
    stats.mean_distance = total ? sum / total : 0.0;
    stats.tail_mass = total ? static_cast<double>(tail) / total : 0.0;
    study.per_dim.push_back(std::move(stats));
  }
  study.mean_nondecreasing = true;
  for (std::size_t d = 1; d < study.per_dim.size(); ++d) {
    if (study.per_dim[d].mean_distance < study.per_dim[d - 1].mean_distance) study.mean_nondecreasing = false;
  }
  return study;
}

namespace {

// ---------------------------------------------------------------- config

json common_defaults() {
  return json{{"model", "market4"}, {"seed", 1}, {"out", ""}};
}

json command_defaults(const std::string& cmd) {
  json d = common_defaults();
  if (cmd == "distribution") {
    d["length"] = 6;
  } else if (cmd == "histogram") {
    d.update(json{{"kernel", {"predictive:trace", "predictive:bures", "predictive:fidelity"}},
                  {"n", 50},
                  {"length", 8},
                  {"dims", {2, 4, 16}},
                  {"models_per_dim", 20},
                  {"bins", 20}});
  } else if (cmd == "classify") {
    d.update(json{{"kernel", {"predictive:trace", "predictive:bures", "structural:trace", "structural:bures", "rbf"}},
                  {"task", "predictive"},
                  {"window", "last"},
                  {"n", 500},
                  {"length", 8},
                  {"split", 0.5},
                  {"reps", 100},
                  {"c", 1.0},
                  {"k", 5}});
  } else if (cmd == "verify") {
    d.update(json{{"suite", "all"}, {"n", 100}, {"length", 8}, {"instances", 200}, {"pairs", 100}, {"triples", 1000},
                  {"horizon", 3}, {"task", "predictive"}, {"window", "last"}});
  } else if (cmd == "circuits") {
    d.update(json{{"sub", "swap"},
                  {"shots", 1000},
                  {"pairs", 20},
                  {"dim", 4},
                  {"identical", false},
                  {"state", "plus"},
                  {"length", 4},
                  {"gamma", 1.0}});
  } else if (cmd == "gram") {
    d.update(json{{"kernel", {"predictive:trace"}}, {"n", 100}, {"length", 8}, {"data", ""}});
  } else if (cmd == "sample") {
    d.update(json{{"task", "predictive"}, {"window", "last"}, {"n", 500}, {"length", 8}});
  }
  return d;
}

/// Raw CLI values for one subcommand; converted against the defaults' JSON types.
struct FlagStore {
  std::map<std::string, std::string> scalars;
  std::map<std::string, CLI::Option*> options;
  std::vector<std::string> kernels;
  CLI::Option* kernel_option = nullptr;
  bool identical = false;
  CLI::Option* identical_option = nullptr;
  std::string config_path;
};

json convert(const std::string& key, const std::string& raw, const json& like) {
  try {
    if (like.is_boolean()) return raw == "true" || raw == "1";
    if (like.is_number_integer()) {
      std::size_t used = 0;
      const long long v = std::stoll(raw, &used);
      if (used != raw.size() || v < 0) throw std::invalid_argument("");
      return v;
    }
    if (like.is_number_float()) {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument("");
      return v;
    }
    if (like.is_array()) {
      json arr = json::array();
      for (const auto& part : split(raw, ',')) arr.push_back(convert(key, part, like.empty() ? json(0) : like.at(0)));
      return arr;
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("--" + key + ": cannot parse '" + raw + "'");
  }
  return raw;
}

void check_types(const json& resolved, const json& defaults) {
  for (const auto& [key, value] : resolved.items()) {
    if (!defaults.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    const json& like = defaults.at(key);
    const bool ok = (like.is_number() && value.is_number()) || like.type() == value.type();
    if (!ok) throw std::invalid_argument("config: key '" + key + "' has the wrong type");
  }
}

json resolve(const std::string& cmd, const FlagStore& flags) {
  const json defaults = command_defaults(cmd);
  json resolved = defaults;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw std::invalid_argument("config: cannot read '" + flags.config_path + "'");
    json file = json::parse(in);
    if (!file.is_object()) throw std::invalid_argument("config: top level must be an object");
    check_types(file, defaults);
    resolved.update(file);
  }
  for (const auto& [key, opt] : flags.options) {
    if (opt->count() > 0) resolved[key] = convert(key, flags.scalars.at(key), defaults.at(key));
  }
  if (flags.kernel_option && flags.kernel_option->count() > 0) resolved["kernel"] = flags.kernels;
  if (flags.identical_option && flags.identical_option->count() > 0) resolved["identical"] = flags.identical;
  return resolved;
}

// ---------------------------------------------------------------- helpers

struct Output {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream;
};

Output open_output(const json& cfg, std::ostream& fallback) {
  const std::string path = cfg.at("out").get<std::string>();
  if (path.empty()) return {nullptr, &fallback};
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*f) throw std::invalid_argument("--out: cannot open '" + path + "' for writing");
  std::ostream* s = f.get();
  return {std::move(f), s};
}

tasks::Labeler labeler_from(const json& cfg) {
  tasks::Labeler l;
  const auto task = cfg.at("task").get<std::string>();
  if (task == "predictive") {
    l.kind = tasks::TaskKind::Predictive;
  } else if (task == "structural") {
    l.kind = tasks::TaskKind::Structural;
  } else {
    throw std::invalid_argument("--task: expected structural or predictive");
  }
  const auto window = cfg.at("window").get<std::string>();
  if (window == "last") {
    l.window = tasks::Window::Last;
  } else if (window == "first") {
    l.window = tasks::Window::First;
  } else {
    throw std::invalid_argument("--window: expected last or first");
  }
  return l;
}

std::vector<kernels::KernelSpec> kernel_specs(const json& cfg) {
  std::vector<kernels::KernelSpec> specs;
  for (const auto& k : cfg.at("kernel")) specs.push_back(kernels::KernelSpec::parse(k.get<std::string>()));
  if (specs.empty()) throw std::invalid_argument("--kernel: at least one kernel is required");
  return specs;
}

LoadedModel load_checked(const json& cfg) {
  LoadedModel m = load_model(cfg.at("model").get<std::string>());
  const auto diag = qhmm::validate(m.channel);
  if (!diag.passed) {
    throw ValidationFailure("model '" + m.name + "' fails the channel check: completeness deviation " +
                            num(diag.completeness_deviation) + ", initial-state violation " +
                            num(diag.initial_violation));
  }
  return m;
}

tasks::ModelRef model_ref(const LoadedModel& m) {
  if (m.classical) return &*m.classical;
  return &m.channel;
}

std::vector<Sequence> sample_sequences(const LoadedModel& m, std::size_t n, int length, std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0);
  std::vector<Sequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(m.classical ? hmm::sample(*m.classical, length, rng) : qhmm::sample(m.channel, length, rng));
  }
  return out;
}

std::vector<Sequence> all_sequences(const std::string& alphabet, int length) {
  check_enumeration(alphabet.size(), length);
  std::vector<Sequence> out{""};
  for (int t = 0; t < length; ++t) {
    std::vector<Sequence> next;
    next.reserve(out.size() * alphabet.size());
    for (const auto& y : out)
      for (char a : alphabet) next.push_back(y + a);
    out.swap(next);
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_distribution(const json& cfg, std::ostream& os) {
  const auto m = load_checked(cfg);
  const int length = cfg.at("length").get<int>();
  const auto dist = qhmm::enumerate_distribution(m.channel, m.channel.initial(), length);
  io::write_distribution_csv(os, dist);
  return kExitOk;
}

int cmd_histogram(const json& cfg, std::ostream& os) {
  const auto base = load_checked(cfg);
  const auto sample = sample_sequences(base, cfg.at("n").get<std::size_t>(), cfg.at("length").get<int>(),
                                       cfg.at("seed").get<std::uint64_t>());
  const auto dims = cfg.at("dims").get<std::vector<std::size_t>>();
  const auto per_dim = cfg.at("models_per_dim").get<std::size_t>();
  const auto bins = cfg.at("bins").get<std::size_t>();

  std::vector<DimensionStudy> studies;
  for (const auto& spec : kernel_specs(cfg)) {
    if (spec.family == kernels::Family::Rbf) throw std::invalid_argument("histogram: rbf has no Hilbert dimension");
    studies.push_back(dimension_study(spec, dims, per_dim, sample, cfg.at("seed").get<std::uint64_t>(), bins));
  }
  os << "dim,kernel,bin_low,bin_high,count\n";
  for (const auto& s : studies) {
    for (const auto& d : s.per_dim) {
      for (std::size_t b = 0; b < bins; ++b) {
        os << d.dim << "," << s.kernel << "," << num(s.edges[b]) << "," << num(s.edges[b + 1]) << "," << d.counts[b]
           << "\n";
      }
    }
  }
  for (const auto& s : studies) {
    os << "# trend kernel=" << s.kernel;
    for (const auto& d : s.per_dim) os << " mean[" << d.dim << "]=" << num(d.mean_distance);
    for (const auto& d : s.per_dim) os << " tail[" << d.dim << "]=" << num(d.tail_mass);
    os << " nondecreasing=" << (s.mean_nondecreasing ? "yes" : "no (flagged for investigation)") << "\n";
  }
  return kExitOk;
}

int cmd_classify(const json& cfg, std::ostream& os) {
  const auto m = load_checked(cfg);
  learn::Protocol p;
  p.n = cfg.at("n").get<std::size_t>();
  p.split = cfg.at("split").get<double>();
  p.reps = cfg.at("reps").get<std::size_t>();
  p.seed = cfg.at("seed").get<std::uint64_t>();
  p.length = cfg.at("length").get<int>();
  p.c_param = cfg.at("c").get<double>();
  p.knn_k = cfg.at("k").get<std::size_t>();
  const auto result = learn::evaluate(m.channel, labeler_from(cfg), kernel_specs(cfg), p);
  io::write_eval_csv(os, result.reports);
  os << "# resampled_splits=" << result.resampled << "\n";
  return kExitOk;
}

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();

  void record(double margin, bool ok) {
    ++instances;
    if (!ok) ++violations;
    worst_margin = std::min(worst_margin, margin);
  }
};

SuiteResult suite_prop1(std::size_t instances, std::uint64_t seed) {
  SuiteResult r{"prop1"};
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng = derive_rng(seed, 100 + i);
    std::uniform_int_distribution<std::size_t> pick_n(2, 4), pick_m(2, 4);
    std::uniform_int_distribution<int> pick_k(1, 4);
    const auto n = pick_n(rng), mm = pick_m(rng);
    const int k = pick_k(rng);
    const auto q = qhmm::kraus_from_unitary(qhmm::random_qhmm(n, mm, "01", {}, rng));
    const auto r1 = qhmm::random_density(n, rng);
    const auto r2 = qhmm::random_density(n, rng);
    const auto check = metrics::check_proposition1(q, r1, r2, k);
    r.record(check.rhs - check.lhs, check.holds);
  }
  return r;
}

SuiteResult suite_prop2(const LoadedModel& m, const tasks::Labeler& labeler, std::size_t pairs, int length, int horizon,
                        std::uint64_t seed) {
  SuiteResult r{"prop2"};
  const auto seqs = sample_sequences(m, 2 * pairs, length, seed);
  const metrics::ClassLabeler label = [&labeler](const Sequence& y) { return labeler(y); };
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto check = metrics::check_proposition2(m.channel, label, seqs[2 * i], seqs[2 * i + 1], horizon);
    r.record(check.rhs - check.lhs, check.holds);
  }
  return r;
}

SuiteResult suite_cptp(const LoadedModel& m) {
  SuiteResult r{"cptp"};
  const auto diag = qhmm::validate(m.channel);
  r.record(1e-10 - std::max(diag.completeness_deviation, diag.initial_violation), diag.passed);
  return r;
}

SuiteResult suite_metric(std::size_t triples, std::uint64_t seed) {
  SuiteResult r{"metric"};
  for (std::size_t i = 0; i < triples; ++i) {
    Rng rng = derive_rng(seed, 10'000 + i);
    std::uniform_int_distribution<std::size_t> pick(2, 8);
    const auto d = pick(rng);
    const auto a = qhmm::random_density(d, rng);
    const auto b = qhmm::random_density(d, rng);
    const auto c = qhmm::random_density(d, rng);
    const double ab = metrics::trace_distance(a, b), bc = metrics::trace_distance(b, c);
    const double ac = metrics::trace_distance(a, c);
    const double slack = ab + bc - ac;
    const bool symmetric = ab == metrics::trace_distance(b, a);
    const double f = metrics::fidelity(a, b);
    r.record(slack, slack >= -1e-9 && symmetric && f >= 0.0 && f <= 1.0);
  }
  return r;
}

SuiteResult suite_psd(const LoadedModel& m, std::size_t n, int length, std::uint64_t seed) {
  SuiteResult r{"psd"};
  const auto seqs = sample_sequences(m, n, length, seed);
  for (const char* id : {"predictive:trace", "structural:trace", "predictive:bures", "structural:bures"}) {
    const auto g = kernels::gram(m.channel, kernels::KernelSpec::parse(id), seqs);
    r.record(g.min_eigenvalue_raw + 1e-8, g.min_eigenvalue_raw >= -1e-8);
  }
  return r;
}

int cmd_verify(const json& cfg, std::ostream& os) {
  const auto suite = cfg.at("suite").get<std::string>();
  static const std::vector<std::string> known{"prop1", "prop2", "cptp", "metric", "psd"};
  if (suite != "all" && std::find(known.begin(), known.end(), suite) == known.end()) {
    throw std::invalid_argument("verify: unknown suite '" + suite + "'");
  }
  // The model check is report content here, so load without the up-front validation.
  const auto m = load_model(cfg.at("model").get<std::string>());
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const int length = cfg.at("length").get<int>();
  std::vector<SuiteResult> results;
  auto wanted = [&](const std::string& s) { return suite == "all" || suite == s; };
  if (wanted("cptp")) results.push_back(suite_cptp(m));
  const bool model_ok = qhmm::validate(m.channel).passed;
  if (wanted("prop1")) results.push_back(suite_prop1(cfg.at("instances").get<std::size_t>(), seed));
  if (wanted("prop2") && model_ok) {
    results.push_back(suite_prop2(m, labeler_from(cfg), cfg.at("pairs").get<std::size_t>(), length,
                                  cfg.at("horizon").get<int>(), seed));
  }
  if (wanted("metric")) results.push_back(suite_metric(cfg.at("triples").get<std::size_t>(), seed));
  if (wanted("psd") && model_ok) results.push_back(suite_psd(m, cfg.at("n").get<std::size_t>(), length, seed));

  bool all_ok = true;
  os << "suite,instances,violations,worst_margin,status\n";
  for (const auto& r : results) {
    const bool ok = r.violations == 0;
    all_ok = all_ok && ok;
    os << r.name << "," << r.instances << "," << r.violations << "," << num(r.worst_margin) << ","
       << (ok ? "pass" : "fail") << "\n";
  }
  return all_ok ? kExitOk : kExitValidation;
}

circuits::PureState named_state(const std::string& name) {
  using linalg::Complex;
  const double h = 1.0 / std::sqrt(2.0);
  if (name == "zero") return circuits::PureState({1.0, 0.0});
  if (name == "one") return circuits::PureState({0.0, 1.0});
  if (name == "plus") return circuits::PureState({h, h});
  if (name == "minus") return circuits::PureState({h, -h});
  if (name == "plus_i") return circuits::PureState({Complex(h, 0), Complex(0, h)});
  if (name == "minus_i") return circuits::PureState({Complex(h, 0), Complex(0, -h)});
  throw std::invalid_argument("--state: expected zero, one, plus, minus, plus_i or minus_i");
}

int cmd_circuits(const json& cfg, std::ostream& os) {
  const auto sub = cfg.at("sub").get<std::string>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto shots = cfg.at("shots").get<std::size_t>();
  if (sub == "swap") {
    const auto dim = cfg.at("dim").get<std::size_t>();
    const bool identical = cfg.at("identical").get<bool>();
    os << "pair,exact,estimate\n";
    for (std::size_t i = 0; i < cfg.at("pairs").get<std::size_t>(); ++i) {
      Rng rng = derive_rng(seed, i);
      const auto psi = circuits::PureState::random(dim, rng);
      const auto phi = identical ? psi : circuits::PureState::random(dim, rng);
      const double exact = 2.0 * (circuits::swap_test_zero_probability(psi, phi) - 0.5);
      os << i << "," << num(exact) << "," << num(circuits::swap_test(psi, phi, shots, rng)) << "\n";
    }
    return kExitOk;
  }
  if (sub == "tomo") {
    const auto psi = named_state(cfg.at("state").get<std::string>());
    const auto rho = qhmm::DensityOperator::pure(psi.amplitudes());
    Rng rng = derive_rng(seed, 0);
    const auto r = circuits::pauli_expectations(rho, shots, rng);
    const auto rec = circuits::reconstruct_density(r);
    const double err = linalg::frobenius_norm(rec.matrix() - rho.matrix());
    os << "state,rx,ry,rz,frobenius_error\n";
    os << cfg.at("state").get<std::string>() << "," << num(r.rx) << "," << num(r.ry) << "," << num(r.rz) << ","
       << num(err) << "\n";
    return kExitOk;
  }
  if (sub == "projgram") {
    const auto m = load_checked(cfg);
    const auto seqs = all_sequences(m.channel.alphabet(), cfg.at("length").get<int>());
    const double gamma = cfg.at("gamma").get<double>();
    circuits::ProjectedGram pg;
    if (shots == 0) {
      pg = circuits::projected_kernel_matrix_exact(m.channel, seqs, gamma);
    } else {
      if (!m.unitary) throw std::invalid_argument("projgram: shot mode needs a unitary model (use --shots 0)");
      Rng rng = derive_rng(seed, 0);
      pg = circuits::projected_kernel_matrix(*m.unitary, seqs, shots, gamma, rng);
    }
    io::write_gram_csv(os, pg.gram);
    for (const auto& y : pg.skipped) os << "# skipped " << y << "\n";
    return kExitOk;
  }
  throw std::invalid_argument("circuits: expected swap, tomo or projgram");
}

int cmd_gram(const json& cfg, std::ostream& os) {
  const auto m = load_checked(cfg);
  const auto specs = kernel_specs(cfg);
  if (specs.size() != 1) throw std::invalid_argument("gram: exactly one --kernel");
  std::vector<Sequence> seqs;
  const auto data = cfg.at("data").get<std::string>();
  if (!data.empty()) {
    std::ifstream in(data);
    if (!in) throw std::invalid_argument("--data: cannot read '" + data + "'");
    seqs = io::read_dataset_csv(in).sequences();
  } else {
    seqs = sample_sequences(m, cfg.at("n").get<std::size_t>(), cfg.at("length").get<int>(),
                            cfg.at("seed").get<std::uint64_t>());
  }
  const auto g = kernels::gram(m.channel, specs.front(), seqs);
  io::write_gram_csv(os, g);
  os << "# min_eigenvalue_raw=" << num(g.min_eigenvalue_raw) << " repaired=" << (g.repaired ? "yes" : "no") << "\n";
  return kExitOk;
}

int cmd_sample(const json& cfg, std::ostream& os) {
  const auto m = load_checked(cfg);
  const auto ds = tasks::generate_dataset(model_ref(m), cfg.at("n").get<std::size_t>(), cfg.at("length").get<int>(),
                                          labeler_from(cfg), cfg.at("seed").get<std::uint64_t>(), m.name);
  io::write_dataset_csv(os, ds);
  return kExitOk;
}

using Command = int (*)(const json&, std::ostream&);

struct Subcommand {
  const char* name;
  const char* description;
  Command run;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> list{
      {"distribution", "Exact distribution over all sequences of one length", cmd_distribution},
      {"histogram", "Pairwise kernel-distance histograms across hidden dimensions", cmd_histogram},
      {"classify", "SVC and k-NN accuracy over repeated random splits", cmd_classify},
      {"verify", "Property suites: prop1, prop2, cptp, metric, psd, all", cmd_verify},
      {"circuits", "Circuit protocols: swap, tomo, projgram", cmd_circuits},
      {"gram", "Kernel Gram matrix over sampled or given sequences", cmd_gram},
      {"sample", "Labeled dataset drawn from a model", cmd_sample},
  };
  return list;
}

void add_flags(CLI::App* sub, const json& defaults, FlagStore& store) {
  sub->add_option("--config", store.config_path, "JSON file with parameter values; flags override it");
  static const std::map<std::string, std::string> help{
      {"model", "market4, random:N:M:seed, or a model JSON path"},
      {"task", "structural or predictive"},
      {"window", "predictive window: last or first"},
      {"n", "number of sequences"},
      {"length", "sequence length"},
      {"split", "training fraction"},
      {"reps", "repetitions"},
      {"seed", "master seed"},
      {"shots", "shots per circuit or basis (0 = exact where supported)"},
      {"gamma", "projected-kernel bandwidth"},
      {"out", "output path (default stdout)"},
      {"dims", "comma-separated hidden dimensions"},
      {"models_per_dim", "random models per dimension"},
      {"bins", "histogram bins"},
      {"c", "SVM box constraint"},
      {"k", "neighbours for k-NN"},
      {"instances", "prop1 random instances"},
      {"pairs", "sequence or state pairs"},
      {"triples", "metric-suite random triples"},
      {"horizon", "prop2 continuation length"},
      {"dim", "state dimension"},
      {"state", "named single-qubit state"},
      {"data", "dataset CSV to read sequences from"},
  };
  for (const auto& [key, value] : defaults.items()) {
    if (key == "kernel") {
      store.kernel_option = sub->add_option("--kernel", store.kernels, "family:metric or rbf; repeatable")
                                ->delimiter(',');
      continue;
    }
    if (key == "identical") {
      store.identical_option = sub->add_flag("--identical", store.identical, "use identical states in each pair");
      continue;
    }
    if (key == "suite" || key == "sub") {
      store.options[key] = sub->add_option(key, store.scalars[key], key == "suite" ? "suite name" : "protocol");
      continue;
    }
    const auto it = help.find(key);
    store.options[key] = sub->add_option("--" + key, store.scalars[key], it == help.end() ? "" : it->second);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qkern: quantum hidden Markov model kernels"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::map<std::string, FlagStore> stores;
  std::map<std::string, CLI::App*> apps;
  for (const auto& s : subcommands()) {
    auto* sub = app.add_subcommand(s.name, s.description);
    add_flags(sub, command_defaults(s.name), stores[s.name]);
    apps[s.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& s : subcommands()) {
    if (!apps[s.name]->parsed()) continue;
    try {
      const json cfg = resolve(s.name, stores[s.name]);
      auto sink = open_output(cfg, out);
      json recorded = cfg;
      recorded.erase("out");  // the destination does not change the content
      *sink.stream << io::output_header(s.name, recorded, cfg.at("seed").get<std::uint64_t>());
      const int code = s.run(cfg, *sink.stream);
      sink.stream->flush();
      return code;
    } catch (const ValidationFailure& e) {
      err << "qkern: " << e.what() << "\n";
      return kExitValidation;
    } catch (const NumericalError& e) {
      err << "qkern: numerical failure: " << e.what() << "\n";
      return kExitValidation;
    } catch (const ImpossibleSequenceError& e) {
      err << "qkern: " << e.what() << " (sequence '" << e.sequence() << "')\n";
      return kExitValidation;
    } catch (const std::exception& e) {
      err << "qkern: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return kExitUsage;
}

}  // namespace qkern::harness
