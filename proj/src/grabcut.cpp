// Copyright 2026 The weakbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weakbound/grabcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "weakbound/maxflow.hpp"

namespace weakbound {
namespace {

using Color = std::array<double, 3>;
constexpr double kPi = 3.14159265358979323846;

struct Moments {
  double n = 0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();

  void add(const Color& z) {
    const Eigen::Vector3d v(z[0], z[1], z[2]);
    n += 1;
    sum += v;
    outer += v * v.transpose();
  }
  Eigen::Vector3d mean() const { return sum / n; }
  Eigen::Matrix3d cov() const {
    const Eigen::Vector3d m = mean();
    Eigen::Matrix3d c = outer / n - m * m.transpose();
    return 0.5 * (c + c.transpose());
  }
};

GaussianComponent make_component(const Moments& m, double total, double regularization) {
  GaussianComponent g;
  g.weight = m.n / total;
  const Eigen::Vector3d mu = m.mean();
  Eigen::Matrix3d c = m.cov() + regularization * Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d inv = c.inverse();
  for (int r = 0; r < 3; ++r) {
    g.mean[r] = mu[r];
    for (int k = 0; k < 3; ++k) {
      g.cov[3 * r + k] = c(r, k);
      g.inv_cov[3 * r + k] = inv(r, k);
    }
  }
  g.log_norm = 0.5 * (3.0 * std::log(2.0 * kPi) + std::log(c.determinant()));
  return g;
}

struct Crop {
  Rect area;     // padded crop in image coordinates
  Rect unknown;  // box clipped to the image
  int width() const { return area.width(); }
  int height() const { return area.height(); }
};

// 8-neighbourhood, each undirected edge once.
constexpr int kDx[4] = {1, 0, 1, -1};
constexpr int kDy[4] = {0, 1, 1, 1};

class Solver {
 public:
  Solver(const RgbImage& image, const Crop& crop, const GrabCutParams& p) : crop_(crop), p_(p) {
    const int w = crop.width(), h = crop.height();
    z_.resize(static_cast<std::size_t>(w) * h);
    fixed_bg_.resize(z_.size());
    alpha_.resize(z_.size());
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Rgb& c = image(crop.area.x0 + x, crop.area.y0 + y);
        const std::size_t i = idx(x, y);
        z_[i] = Color{double(c.r), double(c.g), double(c.b)};
        const bool inside = crop.unknown.contains(crop.area.x0 + x, crop.area.y0 + y);
        fixed_bg_[i] = !inside;
        alpha_[i] = inside ? 1 : 0;
      }
    compute_pairwise();
  }

  bool has_background() const { return std::find(fixed_bg_.begin(), fixed_bg_.end(), true) != fixed_bg_.end(); }

  std::vector<double> run(int iterations) {
    std::vector<int> comp(z_.size(), 0);
    init_models(comp);
    std::vector<double> trace{energy_with(comp)};
    for (int it = 0; it < iterations; ++it) {
      // Refit; keep the previous parameters if the regularized fit does not help.
      const auto old_fg = fg_, old_bg = bg_;
      const double before = energy_with(comp);
      fit_models(comp);
      if (energy_with(comp) > before) {
        fg_ = old_fg;
        bg_ = old_bg;
      }
      for (std::size_t i = 0; i < z_.size(); ++i) comp[i] = model(alpha_[i]).best_component(z_[i]);
      cut();
      for (std::size_t i = 0; i < z_.size(); ++i) comp[i] = model(alpha_[i]).best_component(z_[i]);
      trace.push_back(energy_with(comp));
    }
    return trace;
  }

  void write_mask(BinaryMap& out) const {
    for (int y = 0; y < crop_.height(); ++y)
      for (int x = 0; x < crop_.width(); ++x)
        out(crop_.area.x0 + x, crop_.area.y0 + y) = alpha_[idx(x, y)];
  }

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * crop_.width() + x; }
  const GmmModel& model(int a) const { return a ? fg_ : bg_; }

  void compute_pairwise() {
    const int w = crop_.width(), h = crop_.height();
    double sum = 0;
    std::size_t n = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int d = 0; d < 4; ++d) {
          const int nx = x + kDx[d], ny = y + kDy[d];
          if (nx < 0 || nx >= w || ny >= h) continue;
          sum += dist2(z_[idx(x, y)], z_[idx(nx, ny)]);
          ++n;
        }
    const double mean = n ? sum / n : 0.0;
    const double beta = mean > 0 ? 1.0 / (2.0 * mean) : 0.0;
    weights_.assign(z_.size() * 4, 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int d = 0; d < 4; ++d) {
          const int nx = x + kDx[d], ny = y + kDy[d];
          if (nx < 0 || nx >= w || ny >= h) continue;
          const double len = (d >= 2) ? std::sqrt(2.0) : 1.0;
          weights_[4 * idx(x, y) + d] = p_.gamma / len * std::exp(-beta * dist2(z_[idx(x, y)], z_[idx(nx, ny)]));
        }
  }

  static double dist2(const Color& a, const Color& b) {
    const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
  }

  void gather(int a, std::vector<Color>& samples, std::vector<std::size_t>& where) const {
    samples.clear();
    where.clear();
    for (std::size_t i = 0; i < z_.size(); ++i)
      if (alpha_[i] == a) {
        samples.push_back(z_[i]);
        where.push_back(i);
      }
  }

  void init_models(std::vector<int>& comp) {
    std::vector<Color> s;
    std::vector<std::size_t> where;
    for (int a = 0; a < 2; ++a) {
      gather(a, s, where);
      const auto labels = GmmModel::initial_clusters(s, p_.components);
      for (std::size_t k = 0; k < where.size(); ++k) comp[where[k]] = labels[k];
    }
    fit_models(comp);
  }

  void fit_models(const std::vector<int>& comp) {
    std::vector<Color> s;
    std::vector<std::size_t> where;
    for (int a = 0; a < 2; ++a) {
      gather(a, s, where);
      if (s.empty()) continue;  // keep the previous model for an empty class
      std::vector<int> lab(where.size());
      for (std::size_t k = 0; k < where.size(); ++k) lab[k] = comp[where[k]];
      (a ? fg_ : bg_) = GmmModel::fit(s, lab, p_.components, p_.regularization);
    }
  }

  double unary(std::size_t i, int a, const std::vector<int>& comp) const {
    const GmmModel& m = model(a);
    const int k = comp[i];
    if (k >= 0 && k < static_cast<int>(m.components.size()) && m.components[k].weight > 0)
      return m.components[k].cost(z_[i]);
    return m.min_cost(z_[i]);
  }

  double energy_with(const std::vector<int>& comp) const {
    const int w = crop_.width(), h = crop_.height();
    double e = 0;
    for (std::size_t i = 0; i < z_.size(); ++i) e += unary(i, alpha_[i], comp);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int d = 0; d < 4; ++d) {
          const int nx = x + kDx[d], ny = y + kDy[d];
          if (nx < 0 || nx >= w || ny >= h) continue;
          if (alpha_[idx(x, y)] != alpha_[idx(nx, ny)]) e += weights_[4 * idx(x, y) + d];
        }
    return e;
  }

  // Exact minimisation over alpha (and, implicitly, component labels) for the
  // current models. Fixed background pixels are folded into t-links.
  void cut() {
    const int w = crop_.width(), h = crop_.height();
    std::vector<int> node(z_.size(), -1);
    int n = 0;
    for (std::size_t i = 0; i < z_.size(); ++i)
      if (!fixed_bg_[i]) node[i] = n++;
    MaxFlowGraph g(n);
    std::vector<double> cost_fg(n), cost_bg(n);
    for (std::size_t i = 0; i < z_.size(); ++i)
      if (node[i] >= 0) {
        cost_fg[node[i]] = fg_.min_cost(z_[i]);
        cost_bg[node[i]] = bg_.min_cost(z_[i]);
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int d = 0; d < 4; ++d) {
          const int nx = x + kDx[d], ny = y + kDy[d];
          if (nx < 0 || nx >= w || ny >= h) continue;
          const std::size_t i = idx(x, y), j = idx(nx, ny);
          const double wt = weights_[4 * i + d];
          if (node[i] >= 0 && node[j] >= 0)
            g.add_edge(node[i], node[j], wt, wt);
          else if (node[i] >= 0)
            cost_fg[node[i]] += wt;
          else if (node[j] >= 0)
            cost_fg[node[j]] += wt;
        }
    // Source side = foreground; a node on the sink side pays its source link.
    for (int k = 0; k < n; ++k) {
      const double m = std::min(cost_fg[k], cost_bg[k]);
      g.add_terminal(k, cost_bg[k] - m, cost_fg[k] - m);
    }
    g.solve();
    for (std::size_t i = 0; i < z_.size(); ++i)
      if (node[i] >= 0) alpha_[i] = g.in_source_segment(node[i]) ? 1 : 0;
  }

  Crop crop_;
  GrabCutParams p_;
  std::vector<Color> z_;
  std::vector<bool> fixed_bg_;
  std::vector<std::uint8_t> alpha_;
  std::vector<double> weights_;
  GmmModel fg_, bg_;
};

}  // namespace

double GaussianComponent::cost(const Color& z) const noexcept {
  const double d0 = z[0] - mean[0], d1 = z[1] - mean[1], d2 = z[2] - mean[2];
  const double q = d0 * (inv_cov[0] * d0 + inv_cov[1] * d1 + inv_cov[2] * d2) +
                   d1 * (inv_cov[3] * d0 + inv_cov[4] * d1 + inv_cov[5] * d2) +
                   d2 * (inv_cov[6] * d0 + inv_cov[7] * d1 + inv_cov[8] * d2);
  return -std::log(weight) + log_norm + 0.5 * q;
}

GmmModel GmmModel::fit(std::span<const Color> samples, std::span<const int> assignment, int num_components,
                       double regularization) {
  std::vector<Moments> m(static_cast<std::size_t>(num_components));
  double total = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int k = assignment[i];
    if (k < 0 || k >= num_components) continue;
    m[k].add(samples[i]);
    total += 1;
  }
  GmmModel out;
  for (const auto& mk : m)
    if (mk.n > 0) out.components.push_back(make_component(mk, total, regularization));
    else out.components.push_back(GaussianComponent{});  // weight 0 placeholder keeps labels stable
  return out;
}

std::vector<int> GmmModel::initial_clusters(std::span<const Color> samples, int num_components) {
  std::vector<int> label(samples.size(), 0);
  if (samples.empty()) return label;
  int clusters = 1;
  while (clusters < num_components) {
    int best = -1;
    double best_eig = 1e-9;
    Eigen::Vector3d best_dir, best_mean;
    for (int c = 0; c < clusters; ++c) {
      Moments m;
      for (std::size_t i = 0; i < samples.size(); ++i)
        if (label[i] == c) m.add(samples[i]);
      if (m.n < 2) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.cov());
      const double eig = es.eigenvalues()[2];
      if (eig > best_eig) {
        best_eig = eig;
        best = c;
        best_dir = es.eigenvectors().col(2);
        best_mean = m.mean();
      }
    }
    if (best < 0) break;
    bool moved = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (label[i] != best) continue;
      const Eigen::Vector3d v(samples[i][0], samples[i][1], samples[i][2]);
      if ((v - best_mean).dot(best_dir) > 0) {
        label[i] = clusters;
        moved = true;
      }
    }
    if (!moved) break;
    ++clusters;
  }
  return label;
}

int GmmModel::best_component(const Color& z) const noexcept {
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (components[k].weight <= 0) continue;
    const double c = components[k].cost(z);
    if (c < best_cost) {
      best_cost = c;
      best = static_cast<int>(k);
    }
  }
  return best;
}

double GmmModel::min_cost(const Color& z) const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : components)
    if (c.weight > 0) best = std::min(best, c.cost(z));
  return best;
}

GrabCutResult grabcut(const RgbImage& image, const Rect& rect, int iterations, const GrabCutParams& params) {
  if (!rect.valid()) throw ParameterError("grabcut: invalid rect");
  if (iterations < 1) throw ParameterError("grabcut: iterations must be >= 1");
  const auto unknown = clip(rect, image.width(), image.height());
  if (!unknown) throw ParameterError("grabcut: rect lies outside the image");
  Crop crop{pad_and_clip(*unknown, params.crop_padding, image.width(), image.height()), *unknown};

  GrabCutResult result{BinaryMap(image.width(), image.height(), 0), {}};
  Solver solver(image, crop, params);
  if (!solver.has_background()) {
    // Nothing to contrast against: the whole box stays foreground.
    solver.write_mask(result.mask);
    result.energy_trace.assign(1, 0.0);
    return result;
  }
  result.energy_trace = solver.run(iterations);
  solver.write_mask(result.mask);
  return result;
}

namespace {

bool accept_mask(const BinaryMap& mask, const Rect& box, double iou_accept, AcceptanceIou mode) {
  const auto tight = tight_rect(mask);
  if (!tight) return false;
  if (mode == AcceptanceIou::MaskRectVsBox) return iou(*tight, box) >= iou_accept;
  std::int64_t inside = 0, total = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        ++total;
        inside += box.contains(x, y);
      }
  const double uni = static_cast<double>(box.area() + total - inside);
  return static_cast<double>(inside) / uni >= iou_accept;
}

}  // namespace

TriStateMask grabcut_annotation(const RgbImage& image, const std::vector<DetectionBox>& detections, double iou_accept,
                                const GrabCutParams& params) {
  TriStateMask out(image.width(), image.height(), Tri::Negative);
  BinaryMap positive(image.width(), image.height(), 0);
  for (const auto& det : detections) {
    const auto box = clip(det.rect, image.width(), image.height());
    if (!box) continue;
    const auto res = grabcut(image, *box, params.iterations, params);
    if (accept_mask(res.mask, *box, iou_accept, params.acceptance)) {
      const BinaryMap contour = mask_contour(res.mask);
      for (std::size_t i = 0; i < contour.size(); ++i) positive[i] |= contour[i];
    } else {
      for (int y = box->y0; y < box->y1; ++y)
        for (int x = box->x0; x < box->x1; ++x) out(x, y) = Tri::Ignore;
    }
  }
  for (std::size_t i = 0; i < positive.size(); ++i)
    if (positive[i]) out[i] = Tri::Positive;
  return out;
}

BinaryMap grabcut_boundaries(const RgbImage& image, const std::vector<DetectionBox>& detections, double iou_accept,
                             const GrabCutParams& params) {
  const TriStateMask m = grabcut_annotation(image, detections, iou_accept, params);
  BinaryMap out(m.width(), m.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] == Tri::Positive;
  return out;
}

}  // namespace weakbound
