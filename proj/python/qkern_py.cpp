#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qkern/circuits.hpp"
#include "qkern/harness.hpp"
#include "qkern/kernels.hpp"
#include "qkern/learn.hpp"
#include "qkern/metrics.hpp"
#include "qkern/qhmm.hpp"
#include "qkern/tasks.hpp"

namespace py = pybind11;
using namespace qkern;

namespace {

Eigen::MatrixXcd to_numpy(const linalg::ComplexMatrix& m) {
  Eigen::MatrixXcd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

qhmm::DensityOperator density(const Eigen::MatrixXcd& m) {
  linalg::ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return qhmm::DensityOperator(std::move(out));
}

tasks::Labeler labeler(const std::string& task, const std::string& window) {
  tasks::Labeler l;
  if (task == "predictive") {
    l.kind = tasks::TaskKind::Predictive;
  } else if (task != "structural") {
    throw std::invalid_argument("task must be 'predictive' or 'structural'");
  }
  if (window == "first") {
    l.window = tasks::Window::First;
  } else if (window != "last") {
    throw std::invalid_argument("window must be 'last' or 'first'");
  }
  return l;
}

std::vector<kernels::KernelSpec> specs(const std::vector<std::string>& ids) {
  std::vector<kernels::KernelSpec> out;
  for (const auto& id : ids) out.push_back(kernels::KernelSpec::parse(id));
  return out;
}

}  // namespace

PYBIND11_MODULE(_qkern, m) {
  m.doc() = "Quantum generative kernels for sequence classification";
  m.attr("__version__") = kVersion;

  py::register_exception<ImpossibleSequenceError>(m, "ImpossibleSequenceError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<harness::LoadedModel>(m, "Model")
      .def(py::init(&harness::load_model), py::arg("ref") = "market4",
           "Load 'market4', 'random:N:M:seed' or a JSON model file")
      .def_readonly("name", &harness::LoadedModel::name)
      .def_property_readonly("dim", [](const harness::LoadedModel& lm) { return lm.channel.dim(); })
      .def_property_readonly("alphabet", [](const harness::LoadedModel& lm) { return lm.channel.alphabet(); })
      .def("__repr__", [](const harness::LoadedModel& lm) {
        return "<qkern.Model " + lm.name + " dim=" + std::to_string(lm.channel.dim()) + ">";
      });

  m.def(
      "sequence_probability",
      [](const harness::LoadedModel& lm, const Sequence& y) { return qhmm::sequence_probability(lm.channel, y); },
      py::arg("model"), py::arg("sequence"));
  m.def(
      "distribution",
      [](const harness::LoadedModel& lm, int length) {
        return qhmm::enumerate_distribution(lm.channel, lm.channel.initial(), length).probs;
      },
      py::arg("model"), py::arg("length"), "Exact probability of every sequence of one length");
  m.def(
      "next_symbol_distribution",
      [](const harness::LoadedModel& lm, const Sequence& y) { return qhmm::conditional_next_distribution(lm.channel, y); },
      py::arg("model"), py::arg("sequence"));
  m.def(
      "phi_predictive",
      [](const harness::LoadedModel& lm, const Sequence& y) {
        return to_numpy(kernels::phi_predictive(lm.channel, y).matrix());
      },
      py::arg("model"), py::arg("sequence"), "End state after emitting the sequence");
  m.def(
      "phi_structural",
      [](const harness::LoadedModel& lm, const Sequence& y) {
        return to_numpy(kernels::phi_structural(lm.channel, y).matrix());
      },
      py::arg("model"), py::arg("sequence"), "Mean of the generating states");

  m.def(
      "trace_distance", [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        return metrics::trace_distance(density(a), density(b));
      },
      py::arg("rho"), py::arg("sigma"));
  m.def(
      "fidelity", [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        return metrics::fidelity(density(a), density(b));
      },
      py::arg("rho"), py::arg("sigma"));
  m.def(
      "bures", [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        return metrics::bures(density(a), density(b));
      },
      py::arg("rho"), py::arg("sigma"), "2 - 2 sqrt(F)");

  m.def(
      "kernel_value",
      [](const harness::LoadedModel& lm, const std::string& kernel, const Sequence& y1, const Sequence& y2) {
        return kernels::kernel_value(lm.channel, kernels::KernelSpec::parse(kernel), y1, y2);
      },
      py::arg("model"), py::arg("kernel"), py::arg("y1"), py::arg("y2"));
  m.def(
      "gram",
      [](const harness::LoadedModel& lm, const std::string& kernel, const std::vector<Sequence>& seqs) {
        const auto g = kernels::gram(lm.channel, kernels::KernelSpec::parse(kernel), seqs);
        return py::make_tuple(g.values, g.min_eigenvalue_raw, g.repaired);
      },
      py::arg("model"), py::arg("kernel"), py::arg("sequences"),
      "Returns (matrix, raw minimum eigenvalue, repaired flag)");

  m.def(
      "label", [](const Sequence& y, const std::string& task, const std::string& window) {
        return labeler(task, window)(y);
      },
      py::arg("sequence"), py::arg("task") = "predictive", py::arg("window") = "last");
  m.def(
      "sample_dataset",
      [](const harness::LoadedModel& lm, std::size_t n, int length, const std::string& task, std::uint64_t seed) {
        const tasks::ModelRef ref = lm.classical ? tasks::ModelRef{&*lm.classical} : tasks::ModelRef{&lm.channel};
        const auto ds = tasks::generate_dataset(ref, n, length, labeler(task, "last"), seed, lm.name);
        return py::make_tuple(ds.sequences(), ds.labels());
      },
      py::arg("model"), py::arg("n"), py::arg("length") = 8, py::arg("task") = "predictive", py::arg("seed") = 1,
      "Returns (sequences, labels)");
  m.def(
      "evaluate",
      [](const harness::LoadedModel& lm, const std::string& task, const std::vector<std::string>& kernel_ids,
         std::size_t n, std::size_t reps, int length, double split, double c, std::size_t k, std::uint64_t seed) {
        learn::Protocol p;
        p.n = n;
        p.reps = reps;
        p.length = length;
        p.split = split;
        p.c_param = c;
        p.knn_k = k;
        p.seed = seed;
        py::list rows;
        for (const auto& r : learn::evaluate(lm.channel, labeler(task, "last"), specs(kernel_ids), p).reports) {
          py::dict d;
          d["classifier"] = r.classifier;
          d["kernel"] = r.kernel;
          d["in_sample"] = r.in_sample_accuracy;
          d["in_ci"] = py::make_tuple(r.in_ci_low, r.in_ci_high);
          d["out_sample"] = r.out_sample_accuracy;
          d["out_ci"] = py::make_tuple(r.out_ci_low, r.out_ci_high);
          d["out_per_rep"] = r.out_per_rep;
          rows.append(d);
        }
        return rows;
      },
      py::arg("model"), py::arg("task"), py::arg("kernels"), py::arg("n") = 500, py::arg("reps") = 100,
      py::arg("length") = 8, py::arg("split") = 0.5, py::arg("c") = 1.0, py::arg("k") = 5, py::arg("seed") = 1,
      "SVC and k-NN accuracy over repeated random splits");

  m.def(
      "swap_test",
      [](const std::vector<linalg::Complex>& psi, const std::vector<linalg::Complex>& phi, std::size_t shots,
         std::uint64_t seed) {
        Rng rng = derive_rng(seed, 0);
        return circuits::swap_test(circuits::PureState(psi), circuits::PureState(phi), shots, rng);
      },
      py::arg("psi"), py::arg("phi"), py::arg("shots") = 1000, py::arg("seed") = 1,
      "Estimate of |<phi|psi>|^2 from ancilla statistics");
  m.def(
      "tomography",
      [](const Eigen::MatrixXcd& rho, std::size_t shots, std::uint64_t seed) {
        Rng rng = derive_rng(seed, 0);
        const auto r = circuits::pauli_expectations(density(rho), shots, rng);
        return to_numpy(circuits::reconstruct_density(r).matrix());
      },
      py::arg("rho"), py::arg("shots") = 10000, py::arg("seed") = 1, "Single-qubit Pauli tomography");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"qkern"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = harness::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a qkern subcommand; returns (exit_code, stdout, stderr)");
}
