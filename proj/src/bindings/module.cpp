#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fmcsc/cluster.hpp"
#include "fmcsc/config.hpp"
#include "fmcsc/errors.hpp"
#include "fmcsc/experiment.hpp"

namespace py = pybind11;
using namespace fmcsc;

namespace {

Tensor tensor_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  Tensor t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + t.size(), t.data.begin());
  return t;
}

py::array_t<float> array_from_tensor(const Tensor& t) {
  py::array_t<float> a({t.rows, t.cols});
  std::copy(t.data.begin(), t.data.end(), a.mutable_data());
  return a;
}

py::array_t<std::uint32_t> labels_to_array(const std::vector<std::uint32_t>& labels) {
  py::array_t<std::uint32_t> a(labels.size());
  std::copy(labels.begin(), labels.end(), a.mutable_data());
  return a;
}

std::vector<std::uint32_t> labels_from_array(
    py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d label array");
  return {a.data(), a.data() + a.shape(0)};
}

py::dict report_to_dict(const MetricsReport& report) {
  py::dict out;
  py::list rows;
  for (const auto& r : report.rows) {
    py::dict row;
    row["round"] = r.round;
    row["acc"] = r.acc;
    row["nmi"] = r.nmi;
    row["ari"] = r.ari;
    row["mean_recon_loss_mv"] = r.mean_recon_loss_mv;
    row["mean_contrast_loss_mv"] = r.mean_contrast_loss_mv;
    row["mean_recon_loss_sv"] = r.mean_recon_loss_sv;
    row["mean_contrast_loss_sv"] = r.mean_contrast_loss_sv;
    row["min_weight"] = r.min_weight;
    row["max_weight"] = r.max_weight;
    rows.append(row);
  }
  out["rows"] = rows;
  out["metrics_csv"] = metrics_csv(report);
  out["config_echo"] = report.config_text;
  out["embedding"] = array_from_tensor(report.embedding);
  out["pred_labels"] = labels_to_array(report.pred_labels);
  out["true_labels"] = labels_to_array(report.true_labels);
  return out;
}

}  // namespace

PYBIND11_MODULE(_fmcsc, m) {
  m.doc() = "Federated multi-view clustering simulator core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.def(
      "generate_synthetic",
      [](std::size_t samples, std::size_t classes, std::vector<std::size_t> view_dims,
         double separation, double noise_sigma, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.num_samples = samples;
        spec.num_classes = classes;
        spec.num_views = view_dims.size();
        spec.view_dims = std::move(view_dims);
        spec.cluster_separation = separation;
        spec.noise_sigma = noise_sigma;
        spec.seed = seed;
        auto ds = generate_synthetic(spec);
        py::list views;
        for (const auto& v : ds.views) views.append(array_from_tensor(v));
        py::dict out;
        out["views"] = views;
        out["labels"] = labels_to_array(ds.labels);
        out["num_classes"] = ds.num_classes;
        return out;
      },
      py::arg("samples"), py::arg("classes"), py::arg("view_dims"),
      py::arg("separation") = 6.0, py::arg("noise_sigma") = 0.3, py::arg("seed") = 0,
      "Generate a labeled multi-view Gaussian-cluster dataset.");

  m.def(
      "kmeans",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> points,
         std::size_t k, std::uint64_t seed, std::size_t restarts) {
        KmeansOptions opts;
        opts.restarts = restarts;
        auto assign = kmeans(tensor_from_array(std::move(points)), k, seed, opts);
        py::dict out;
        out["labels"] = labels_to_array(assign.labels);
        out["centers"] = array_from_tensor(assign.centers);
        out["inertia"] = assign.inertia;
        return out;
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 10,
      "Best-of-restarts Lloyd k-means with k-means++ seeding.");

  m.def(
      "accuracy",
      [](py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> pred,
         py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> truth) {
        return clustering_accuracy(labels_from_array(std::move(pred)),
                                   labels_from_array(std::move(truth)));
      },
      py::arg("pred"), py::arg("truth"),
      "Clustering accuracy under the optimal cluster-to-class matching.");

  m.def(
      "nmi",
      [](py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> pred,
         py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> truth) {
        return nmi(labels_from_array(std::move(pred)), labels_from_array(std::move(truth)));
      },
      py::arg("pred"), py::arg("truth"), "Normalized mutual information.");

  m.def(
      "ari",
      [](py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> pred,
         py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast> truth) {
        return ari(labels_from_array(std::move(pred)), labels_from_array(std::move(truth)));
      },
      py::arg("pred"), py::arg("truth"), "Adjusted Rand index.");

  m.def(
      "run_experiment",
      [](const std::string& config_text, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> workers) {
        ExperimentConfig cfg = parse_config_text(config_text);
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        cfg.validate();
        return report_to_dict(run_experiment(cfg));
      },
      py::arg("config_text"), py::arg("seed") = py::none(),
      py::arg("workers") = py::none(),
      "Run a full federated experiment from config text and return the report.");
}
