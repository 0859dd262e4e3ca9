#include "fmcsc/cluster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

double sq_dist(const Tensor& points, std::size_t row, const std::vector<double>& center) {
  const float* p = points.data.data() + row * points.cols;
  double acc = 0.0;
  for (std::size_t c = 0; c < points.cols; ++c) {
    double d = static_cast<double>(p[c]) - center[c];
    acc += d * d;
  }
  return acc;
}

struct LloydResult {
  std::vector<std::uint32_t> labels;
  std::vector<std::vector<double>> centers;
  double inertia = 0.0;
};

std::vector<std::vector<double>> seed_plus_plus(const Tensor& points, std::size_t k,
                                                Rng& rng) {
  std::size_t n = points.rows;
  std::vector<std::vector<double>> centers;
  auto row_of = [&](std::size_t i) {
    std::vector<double> c(points.cols);
    const float* p = points.data.data() + i * points.cols;
    for (std::size_t j = 0; j < points.cols; ++j) c[j] = static_cast<double>(p[j]);
    return c;
  };
  centers.push_back(row_of(rng.uniform_int(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points, i, centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);
    } else {
      double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(row_of(pick));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], sq_dist(points, i, centers.back()));
  }
  return centers;
}

LloydResult lloyd(const Tensor& points, std::size_t k, Rng rng,
                  const KmeansOptions& opts, std::vector<double>* trace) {
  std::size_t n = points.rows, d = points.cols;
  LloydResult res;
  res.centers = seed_plus_plus(points, k, rng);
  res.labels.assign(n, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    // Assignment step.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double dist = sq_dist(points, i, res.centers[c]);
        if (dist < best) {
          best = dist;
          best_c = static_cast<std::uint32_t>(c);
        }
      }
      res.labels[i] = best_c;
      inertia += best;
    }
    res.inertia = inertia;
    if (trace) trace->push_back(inertia);
    // Update step.
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const float* p = points.data.data() + i * d;
      auto& s = sums[res.labels[i]];
      for (std::size_t j = 0; j < d; ++j) s[j] += static_cast<double>(p[j]);
      ++counts[res.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster from the point farthest from its center.
        double far_d = -1.0;
        std::size_t far_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          double dist = sq_dist(points, i, res.centers[res.labels[i]]);
          if (dist > far_d) {
            far_d = dist;
            far_i = i;
          }
        }
        const float* p = points.data.data() + far_i * d;
        for (std::size_t j = 0; j < d; ++j) res.centers[c][j] = static_cast<double>(p[j]);
        res.labels[far_i] = static_cast<std::uint32_t>(c);
      } else {
        for (std::size_t j = 0; j < d; ++j)
          res.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
    if (prev - inertia <= opts.tol * std::max(prev, 1e-30) && iter > 0) break;
    prev = inertia;
  }
  // Final assignment with the last centers so labels/inertia are consistent.
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double dist = sq_dist(points, i, res.centers[c]);
      if (dist < best) {
        best = dist;
        best_c = static_cast<std::uint32_t>(c);
      }
    }
    res.labels[i] = best_c;
    inertia += best;
  }
  res.inertia = inertia;
  return res;
}

}  // namespace

ClusterAssignment kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                         const KmeansOptions& opts) {
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (points.rows < k) throw ConfigError("kmeans: more clusters than points");
  if (!all_finite(points)) throw DataError("kmeans: non-finite input");

  Rng master(seed);
  LloydResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
    std::vector<double>* trace = nullptr;
    if (opts.inertia_trace) {
      opts.inertia_trace->emplace_back();
      trace = &opts.inertia_trace->back();
    }
    LloydResult run = lloyd(points, k, master.stream(r), opts, trace);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  ClusterAssignment out;
  out.labels = std::move(best.labels);
  out.inertia = best.inertia;
  out.centers = Tensor(k, points.cols);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < points.cols; ++j)
      out.centers.data[c * points.cols + j] = static_cast<float>(best.centers[c][j]);
  return out;
}

namespace {

std::size_t relabel_max(std::span<const std::uint32_t> a) {
  std::size_t m = 0;
  for (auto v : a) m = std::max<std::size_t>(m, v + 1);
  return m;
}

std::vector<std::vector<std::size_t>> contingency(std::span<const std::uint32_t> pred,
                                                  std::span<const std::uint32_t> truth,
                                                  std::size_t& kp, std::size_t& kt) {
  if (pred.size() != truth.size())
    throw ProtocolError("metrics: label vectors differ in length");
  if (pred.empty()) throw ProtocolError("metrics: empty label vectors");
  kp = relabel_max(pred);
  kt = relabel_max(truth);
  std::vector<std::vector<std::size_t>> table(kp, std::vector<std::size_t>(kt, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++table[pred[i]][truth[i]];
  return table;
}

// Hungarian algorithm (potentials formulation) minimizing a square cost
// matrix; returns the assignment column for each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  std::size_t n = cost.size();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, n), way(n + 1, n);
  for (std::size_t i = 0; i < n; ++i) {
    p[n] = i;
    std::size_t j0 = n;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = n;
      double delta = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0][j] - u[i0 == n ? n : i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j] == n ? n : p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != n);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != n);
  }
  std::vector<std::size_t> row_to_col(n, n);
  for (std::size_t j = 0; j < n; ++j)
    if (p[j] < n) row_to_col[p[j]] = j;
  return row_to_col;
}

}  // namespace

double clustering_accuracy(std::span<const std::uint32_t> pred,
                           std::span<const std::uint32_t> truth) {
  std::size_t kp, kt;
  auto table = contingency(pred, truth, kp, kt);
  std::size_t n = std::max(kp, kt);
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j)
      cost[i][j] = -static_cast<double>(table[i][j]);
  auto match = hungarian(cost);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < kp; ++i)
    if (match[i] < kt) hits += table[i][match[i]];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double nmi(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  std::size_t kp, kt;
  auto table = contingency(pred, truth, kp, kt);
  double n = static_cast<double>(pred.size());
  std::vector<double> row(kp, 0.0), col(kt, 0.0);
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j) {
      row[i] += static_cast<double>(table[i][j]);
      col[j] += static_cast<double>(table[i][j]);
    }
  double mi = 0.0, hp = 0.0, ht = 0.0;
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j) {
      double nij = static_cast<double>(table[i][j]);
      if (nij > 0.0) mi += nij / n * std::log(nij * n / (row[i] * col[j]));
    }
  for (double r : row)
    if (r > 0.0) hp -= r / n * std::log(r / n);
  for (double c : col)
    if (c > 0.0) ht -= c / n * std::log(c / n);
  double denom = 0.5 * (hp + ht);
  if (denom <= 0.0) return 0.0;  // both labelings constant → 0/0 := 0
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  std::size_t kp, kt;
  auto table = contingency(pred, truth, kp, kt);
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double n = static_cast<double>(pred.size());
  std::vector<double> row(kp, 0.0), col(kt, 0.0);
  double sum_ij = 0.0;
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j) {
      double nij = static_cast<double>(table[i][j]);
      row[i] += nij;
      col[j] += nij;
      sum_ij += choose2(nij);
    }
  double sum_row = 0.0, sum_col = 0.0;
  for (double r : row) sum_row += choose2(r);
  for (double c : col) sum_col += choose2(c);
  double total = choose2(n);
  double expected = sum_row * sum_col / total;
  double max_index = 0.5 * (sum_row + sum_col);
  double denom = max_index - expected;
  if (denom == 0.0) return 0.0;  // both labelings trivial
  return (sum_ij - expected) / denom;
}

Tensor pca_embed_2d(const Tensor& points) {
  std::size_t n = points.rows, d = points.cols;
  if (n == 0 || d == 0) throw ProtocolError("pca_embed_2d: empty input");
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(points.data[i * d + j]);
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::MatrixXd cov = x.transpose() * x / std::max<double>(1.0, double(n) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  Tensor out(n, 2);
  for (int comp = 0; comp < 2; ++comp) {
    Eigen::VectorXd axis;
    if (static_cast<std::size_t>(comp) < d) {
      axis = solver.eigenvectors().col(static_cast<Eigen::Index>(d) - 1 - comp);
      // Deterministic sign: the largest-magnitude coordinate is positive.
      Eigen::Index arg = 0;
      axis.cwiseAbs().maxCoeff(&arg);
      if (axis(arg) < 0.0) axis = -axis;
    } else {
      axis = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    }
    Eigen::VectorXd proj = x * axis;
    for (std::size_t i = 0; i < n; ++i)
      out.data[i * 2 + comp] = static_cast<float>(proj(static_cast<Eigen::Index>(i)));
  }
  return out;
}

}  // namespace fmcsc
