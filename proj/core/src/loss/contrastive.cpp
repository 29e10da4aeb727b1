#include "scenezsl/loss/contrastive.hpp"

#include <algorithm>
#include <cmath>

namespace scenezsl::loss {

LossError::LossError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}

namespace {

double dot(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) s += a[k] * b[k];
  return s;
}

// Row-normalizes an n x dim matrix; returns the normalized rows and norms.
std::vector<double> normalize_rows(std::span<const double> x, std::size_t n, std::size_t dim,
                                   std::vector<double>& norms, const char* which) {
  std::vector<double> out(x.begin(), x.end());
  norms.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.data() + i * dim;
    const double norm = std::sqrt(dot(row, row, dim));
    if (!(norm > 0.0)) {
      throw LossError(LossError::Code::kZeroVector,
                      std::string(which) + " row " + std::to_string(i) + " has zero norm");
    }
    norms[i] = norm;
    for (std::size_t k = 0; k < dim; ++k) row[k] /= norm;
  }
  return out;
}

// Pulls a gradient w.r.t. normalized rows back to the raw rows.
std::vector<double> normalize_backward(const std::vector<double>& unit, const std::vector<double>& norms,
                                       const std::vector<double>& grad_unit, std::size_t n,
                                       std::size_t dim) {
  std::vector<double> grad(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double* u = unit.data() + i * dim;
    const double* g = grad_unit.data() + i * dim;
    const double proj = dot(u, g, dim);
    for (std::size_t k = 0; k < dim; ++k) grad[i * dim + k] = (g[k] - u[k] * proj) / norms[i];
  }
  return grad;
}

// One cross-entropy term over candidates `cand` with target set `pos`:
// returns lse(cand) - lse(pos) and adds scale * (softmax - target) into
// dlogits. Both read with the same stride.
double cross_entropy_term(const double* logits, std::size_t count, std::size_t stride,
                          const std::vector<bool>& cand, const std::vector<bool>& pos, double scale,
                          double* dlogits) {
  double peak = -INFINITY;
  for (std::size_t k = 0; k < count; ++k) {
    if (cand[k]) peak = std::max(peak, logits[k * stride]);
  }
  std::vector<double> e(count, 0.0);
  double sum_all = 0.0;
  double sum_pos = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    if (!cand[k]) continue;
    e[k] = std::exp(logits[k * stride] - peak);
    sum_all += e[k];
    if (pos[k]) sum_pos += e[k];
  }
  for (std::size_t k = 0; k < count; ++k) {
    if (!cand[k]) continue;
    const double target = pos[k] ? e[k] / sum_pos : 0.0;
    dlogits[k * stride] += scale * (e[k] / sum_all - target);
  }
  return std::log(sum_all) - std::log(sum_pos);
}

void check_inputs(std::span<const double> z, std::span<const double> v, std::size_t n, std::size_t dim,
                  double temperature) {
  if (n == 0) throw LossError(LossError::Code::kBatchTooSmall, "contrastive loss needs N >= 1");
  if (!(temperature > 0.0)) throw LossError(LossError::Code::kBadTemperature, "temperature must be > 0");
  if (dim == 0 || z.size() != n * dim || v.size() != n * dim) {
    throw LossError(LossError::Code::kShapeMismatch, "Z and V must both be N x dim");
  }
}

}  // namespace

double cosine_sim(std::span<const double> z, std::span<const double> v) {
  if (z.size() != v.size()) throw LossError(LossError::Code::kShapeMismatch, "cosine of unequal lengths");
  const double zz = dot(z.data(), z.data(), z.size());
  const double vv = dot(v.data(), v.data(), v.size());
  if (!(zz > 0.0) || !(vv > 0.0)) throw LossError(LossError::Code::kZeroVector, "cosine of a zero vector");
  return std::clamp(dot(z.data(), v.data(), z.size()) / (std::sqrt(zz) * std::sqrt(vv)), -1.0, 1.0);
}

SimilarityMatrix similarity_matrix(std::span<const double> z, std::span<const double> v, std::size_t n,
                                   std::size_t dim, double temperature) {
  check_inputs(z, v, n, dim, temperature);
  std::vector<double> zn_norms, vn_norms;
  const auto zn = normalize_rows(z, n, dim, zn_norms, "Z");
  const auto vn = normalize_rows(v, n, dim, vn_norms, "V");
  SimilarityMatrix sim{n, temperature, std::vector<double>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sim.values[i * n + j] = std::clamp(dot(zn.data() + i * dim, vn.data() + j * dim, dim), -1.0, 1.0);
    }
  }
  return sim;
}

ContrastiveResult contrastive_loss(std::span<const double> z, std::span<const double> v, std::size_t n,
                                   std::size_t dim, double temperature, LossForm form,
                                   std::span<const std::size_t> groups) {
  check_inputs(z, v, n, dim, temperature);
  if (!groups.empty() && groups.size() != n) {
    throw LossError(LossError::Code::kShapeMismatch, "groups must have one entry per row");
  }
  const auto group = [&](std::size_t i) { return groups.empty() ? i : groups[i]; };
  std::vector<double> z_norms, v_norms;
  const auto zn = normalize_rows(z, n, dim, z_norms, "Z");
  const auto vn = normalize_rows(v, n, dim, v_norms, "V");

  ContrastiveResult result;
  result.similarity = SimilarityMatrix{n, temperature, std::vector<double>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      result.similarity.values[i * n + j] = dot(zn.data() + i * dim, vn.data() + j * dim, dim);
    }
  }

  std::vector<double> grad_zn(n * dim, 0.0);
  std::vector<double> grad_vn(n * dim, 0.0);
  const double inv_tau = 1.0 / temperature;

  if (form == LossForm::kCrossModal) {
    // logits[i][j] = sim(z_i, v_j) / tau; dlogits accumulates both directions.
    std::vector<double> logits(n * n);
    for (std::size_t k = 0; k < n * n; ++k) logits[k] = result.similarity.values[k] * inv_tau;
    std::vector<double> dlogits(n * n, 0.0);
    const std::vector<bool> all(n, true);
    std::vector<bool> pos(n);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) pos[j] = group(j) == group(i);
      // Point i against all prompts (row i), then prompt i against all
      // points (column i).
      total += cross_entropy_term(&logits[i * n], n, 1, all, pos, scale, &dlogits[i * n]);
      total += cross_entropy_term(&logits[i], n, n, all, pos, scale, &dlogits[i]);
    }
    result.loss = total * scale;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double g = dlogits[i * n + j] * inv_tau;
        if (g == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) {
          grad_zn[i * dim + k] += g * vn[j * dim + k];
          grad_vn[j * dim + k] += g * zn[i * dim + k];
        }
      }
    }
  } else {
    // Rows 0..n-1 are Z, n..2n-1 are V; the positive of row a is a +- n.
    const std::size_t m = 2 * n;
    std::vector<double> u(m * dim);
    std::copy(zn.begin(), zn.end(), u.begin());
    std::copy(vn.begin(), vn.end(), u.begin() + static_cast<std::ptrdiff_t>(n * dim));
    std::vector<double> logits(m * m);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) logits[a * m + b] = dot(&u[a * dim], &u[b * dim], dim) * inv_tau;
    }
    std::vector<double> dlogits(m * m, 0.0);
    const double scale = 1.0 / static_cast<double>(m);
    double total = 0.0;
    std::vector<bool> cand(m), pos(m);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        cand[b] = b != a;
        pos[b] = cand[b] && group(b % n) == group(a % n);
      }
      total += cross_entropy_term(&logits[a * m], m, 1, cand, pos, scale, &dlogits[a * m]);
    }
    result.loss = total * scale;
    // logits = U U^T / tau, so dU = (dL + dL^T) U / tau.
    std::vector<double> grad_u(m * dim, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        const double g = (dlogits[a * m + b] + dlogits[b * m + a]) * inv_tau;
        if (g == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) grad_u[a * dim + k] += g * u[b * dim + k];
      }
    }
    std::copy(grad_u.begin(), grad_u.begin() + static_cast<std::ptrdiff_t>(n * dim), grad_zn.begin());
    std::copy(grad_u.begin() + static_cast<std::ptrdiff_t>(n * dim), grad_u.end(), grad_vn.begin());
  }

  result.grad_z = normalize_backward(zn, z_norms, grad_zn, n, dim);
  result.grad_v = normalize_backward(vn, v_norms, grad_vn, n, dim);
  for (double& s : result.similarity.values) s = std::clamp(s, -1.0, 1.0);
  return result;
}

}  // namespace scenezsl::loss
