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

#include "weakbound/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "weakbound/filters.hpp"
#include "weakbound/parallel.hpp"

namespace weakbound {
namespace {

Plane central_dx(const Plane& p) {
  const int w = p.width(), h = p.height();
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int a = std::max(0, x - 1), b = std::min(w - 1, x + 1);
      out(x, y) = b > a ? (p(b, y) - p(a, y)) / static_cast<float>(b - a) : 0.f;
    }
  return out;
}

Plane central_dy(const Plane& p) {
  const int w = p.width(), h = p.height();
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    const int a = std::max(0, y - 1), b = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) out(x, y) = b > a ? (p(x, b) - p(x, a)) / static_cast<float>(b - a) : 0.f;
  }
  return out;
}

// Neighbours P2..P9 clockwise from north; off-image counts as 0.
std::array<int, 8> ring(const BinaryMap& m, int x, int y) {
  constexpr int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  constexpr int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  std::array<int, 8> r{};
  for (int k = 0; k < 8; ++k) {
    const int u = x + dx[k], v = y + dy[k];
    r[k] = m.contains(u, v) && m(u, v) ? 1 : 0;
  }
  return r;
}

bool in_full_block(const BinaryMap& m, int x, int y) {
  for (int oy = -1; oy <= 0; ++oy)
    for (int ox = -1; ox <= 0; ++ox) {
      bool full = true;
      for (int j = 0; j < 2 && full; ++j)
        for (int i = 0; i < 2 && full; ++i) {
          const int u = x + ox + i, v = y + oy + j;
          full = m.contains(u, v) && m(u, v);
        }
      if (full) return true;
    }
  return false;
}

struct Offset {
  int dx, dy, d2;
};

std::vector<Offset> disc_offsets(double radius) {
  std::vector<Offset> out;
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r2 + 1e-9) out.push_back({dx, dy, dx * dx + dy * dy});
  std::stable_sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) { return a.d2 < b.d2; });
  return out;
}

// Maximum matching seeded greedily by distance, completed by augmenting paths.
class Matcher {
 public:
  explicit Matcher(std::vector<std::vector<int>> adj, int right) : adj_(std::move(adj)), left_(adj_.size(), -1),
                                                                   right_(static_cast<std::size_t>(right), -1) {}

  void greedy(std::vector<std::tuple<int, int, int>> edges) {
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (const auto& [d2, u, v] : edges)
      if (left_[u] < 0 && right_[v] < 0) {
        left_[u] = v;
        right_[v] = u;
      }
  }

  void complete() {
    std::vector<int> seen(adj_.size(), 0);
    int phase = 0;
    bool grew = true;
    while (grew) {
      grew = false;
      ++phase;
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (left_[u] < 0 && !adj_[u].empty() && seen[u] != phase && augment(static_cast<int>(u), seen, phase))
          grew = true;
    }
  }

  const std::vector<int>& left() const noexcept { return left_; }

 private:
  bool augment(int root, std::vector<int>& seen, int phase) {
    std::vector<std::pair<int, std::size_t>> st{{root, 0}};
    seen[root] = phase;
    while (!st.empty()) {
      const int u = st.back().first;
      std::size_t& k = st.back().second;
      if (k == adj_[u].size()) {
        st.pop_back();
        continue;
      }
      const int v = adj_[u][k++];
      const int next = right_[v];
      if (next < 0) {
        for (const auto& [uu, kk] : st) {
          const int vv = adj_[uu][kk - 1];
          left_[uu] = vv;
          right_[vv] = uu;
        }
        return true;
      }
      if (seen[next] != phase) {
        seen[next] = phase;
        st.push_back({next, 0});
      }
    }
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> left_, right_;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

PrPoint pr_point(const MatchCounts& c) noexcept {
  PrPoint p;
  const auto cand = c.tp + c.fp;
  p.precision = cand > 0 ? static_cast<double>(c.tp) / static_cast<double>(cand) : 0.0;
  p.recall = c.sum_r_total > 0 ? static_cast<double>(c.sum_r_tp) / static_cast<double>(c.sum_r_total) : 0.0;
  p.f = p.precision + p.recall > 0 ? 2 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
  return p;
}

ProbMap nms_thin(const ProbMap& prob) {
  const int w = prob.width(), h = prob.height();
  ProbMap out(w, h, 0.f);
  float mx = 0;
  for (float v : prob.pixels()) mx = std::max(mx, v);
  if (!(mx > 0)) return out;

  // Work on the max-normalised map so the result commutes with positive rescaling.
  Plane e(w, h);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = prob[i] / mx;
  const Plane coarse = triangle_blur(e, 4);
  const Plane fine = triangle_blur(e, 1);
  const Plane ox = central_dx(coarse), oy = central_dy(coarse);
  const Plane oxx = central_dx(ox), oxy = central_dy(ox), oyy = central_dy(oy);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = prob.index(x, y);
      if (!(prob[i] > 0)) continue;
      const float s = oxy[i] > 0 ? -1.f : 1.f;
      float theta = std::atan(oyy[i] * s / (oxx[i] + 1e-5f));
      if (theta < 0) theta += std::numbers::pi_v<float>;
      const float c = std::cos(theta), sn = std::sin(theta);
      const float v = fine[i];
      const float ahead = sample_bilinear(fine, static_cast<float>(x) + c, static_cast<float>(y) + sn);
      const float behind = sample_bilinear(fine, static_cast<float>(x) - c, static_cast<float>(y) - sn);
      if (v >= ahead && v > behind) out[i] = prob[i];
    }
  return out;
}

BinaryMap thin_binary(const BinaryMap& mask) {
  BinaryMap m(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask[i] ? 1 : 0;
  const int w = m.width(), h = m.height();
  bool changed = true;
  std::vector<std::size_t> remove;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      remove.clear();
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (!m(x, y) || !in_full_block(m, x, y)) continue;
          const auto p = ring(m, x, y);
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            a += !p[k] && p[(k + 1) % 8];
          }
          if (b < 2 || b > 6 || a != 1) continue;
          // p[0]=N, p[2]=E, p[4]=S, p[6]=W
          const bool ok = pass == 0 ? (!(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6]))
                                    : (!(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6]));
          if (ok) remove.push_back(m.index(x, y));
        }
      for (auto i : remove) m[i] = 0;
      changed |= !remove.empty();
    }
  }
  return m;
}

MatchCounts correspond(const BinaryMap& cand, std::span<const BinaryMap> gts, double max_dist) {
  if (!(max_dist > 0 && max_dist < 1)) throw ParameterError("correspond: max_dist must lie in (0,1)");
  const int w = cand.width(), h = cand.height();
  for (const auto& g : gts)
    if (!g.same_shape(cand)) throw ParameterError("correspond: candidate and GT sizes differ");
  const auto offsets = disc_offsets(max_dist * std::hypot(static_cast<double>(w), static_cast<double>(h)));

  std::vector<std::pair<int, int>> cpix;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (cand(x, y)) cpix.push_back({x, y});
  std::vector<char> any(cpix.size(), 0);
  MatchCounts out;
  std::vector<int> gindex(cand.size());
  for (const auto& g : gts) {
    int ng = 0;
    for (std::size_t i = 0; i < g.size(); ++i) gindex[i] = g[i] ? ng++ : -1;
    out.sum_r_total += ng;
    if (ng == 0 || cpix.empty()) continue;
    std::vector<std::vector<int>> adj(cpix.size());
    std::vector<std::tuple<int, int, int>> edges;
    for (std::size_t u = 0; u < cpix.size(); ++u) {
      const auto [x, y] = cpix[u];
      for (const auto& o : offsets) {
        const int gx = x + o.dx, gy = y + o.dy;
        if (gx < 0 || gy < 0 || gx >= w || gy >= h) continue;
        const int v = gindex[g.index(gx, gy)];
        if (v < 0) continue;
        adj[u].push_back(v);
        edges.emplace_back(o.d2, static_cast<int>(u), v);
      }
    }
    Matcher m(std::move(adj), ng);
    m.greedy(std::move(edges));
    m.complete();
    for (std::size_t u = 0; u < cpix.size(); ++u)
      if (m.left()[u] >= 0) {
        ++out.sum_r_tp;
        any[u] = 1;
      }
  }
  out.tp = std::count(any.begin(), any.end(), 1);
  out.fp = static_cast<std::int64_t>(cpix.size()) - out.tp;
  return out;
}

double average_precision(std::span<const PrPoint> points) noexcept {
  double sum = 0;
  for (int s = 1; s <= 100; ++s) {
    const double r = s / 100.0;
    double best = 0;
    for (const auto& p : points)
      if (p.recall >= r - 1e-12) best = std::max(best, p.precision);
    sum += best;
  }
  return sum / 100.0;
}

PrSummary pr_curve(std::span<const EvalItem> items, const PrOptions& options, int jobs) {
  if (items.empty()) throw ParameterError("pr_curve: no images");
  if (options.n_thresh < 1) throw ParameterError("pr_curve: n_thresh must be >= 1");
  const auto nt = static_cast<std::size_t>(options.n_thresh);

  float scale = 1.0f;
  if (options.mode == ThresholdMode::Relative) {
    scale = 0.0f;
    for (const auto& it : items)
      for (float v : it.prob.pixels()) scale = std::max(scale, v);
  }
  PrSummary s;
  for (std::size_t k = 1; k <= nt; ++k) s.thresholds.push_back(static_cast<double>(k) / static_cast<double>(nt + 1));
  s.per_image.assign(items.size(), std::vector<MatchCounts>(nt));
  for (const auto& it : items) s.ids.push_back(it.id);

  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const EvalItem& it = items[i];
    for (const auto& g : it.gts)
      if (!g.same_shape(it.prob)) throw ParameterError("pr_curve: GT size differs for image " + it.id);
    // GT goes through the same thinning, so a prediction equal to GT matches fully.
    std::vector<BinaryMap> thin_gts;
    if (options.thin)
      for (const auto& g : it.gts) thin_gts.push_back(thin_binary(g));
    const std::span<const BinaryMap> gts = options.thin ? std::span<const BinaryMap>(thin_gts) : it.gts;
    BinaryMap prev;
    for (std::size_t k = 0; k < nt; ++k) {
      const float thr = static_cast<float>(s.thresholds[k]) * scale;
      BinaryMap bin(it.prob.width(), it.prob.height(), 0);
      for (std::size_t p = 0; p < bin.size(); ++p) bin[p] = it.prob[p] > 0 && it.prob[p] >= thr;
      if (k > 0 && bin == prev) {
        s.per_image[i][k] = s.per_image[i][k - 1];
        continue;
      }
      const BinaryMap cand = options.thin ? thin_binary(bin) : bin;
      s.per_image[i][k] = correspond(cand, gts, options.max_dist);
      prev = std::move(bin);
    }
  });

  s.totals.assign(nt, {});
  for (const auto& img : s.per_image)
    for (std::size_t k = 0; k < nt; ++k) s.totals[k] += img[k];
  for (const auto& c : s.totals) s.points.push_back(pr_point(c));

  std::size_t best = 0;
  for (std::size_t k = 1; k < nt; ++k)
    if (s.points[k].f > s.points[best].f) best = k;
  s.ods_f = s.points[best].f;
  s.ods_precision = s.points[best].precision;
  s.ods_recall = s.points[best].recall;
  s.ods_threshold = s.thresholds[best];

  MatchCounts ois;
  for (const auto& img : s.per_image) {
    std::size_t b = 0;
    for (std::size_t k = 1; k < nt; ++k)
      if (pr_point(img[k]).f > pr_point(img[b]).f) b = k;
    ois += img[b];
  }
  const PrPoint op = pr_point(ois);
  s.ois_f = op.f;
  s.ois_precision = op.precision;
  s.ois_recall = op.recall;
  s.ap = average_precision(s.points);
  return s;
}

BinaryMap class_external_contours(const LabelMap& instances) {
  BinaryMap m(instances.width(), instances.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = instances[i] > 0;
  return mask_contour(m);
}

SbdResult sbd_eval(std::span<const std::pair<int, std::vector<ClassImage>>> per_class, const PrOptions& options,
                   int jobs) {
  SbdResult r;
  std::size_t present = 0;
  for (const auto& [cls, images] : per_class) {
    ClassResult cr;
    cr.class_id = cls;
    std::vector<EvalItem> items;
    for (const auto& im : images) {
      if (!im.prob.same_shape(im.instances)) throw ParameterError("sbd_eval: prediction/GT size differs for " + im.id);
      for (auto v : im.instances.pixels()) cr.present |= v > 0;
      items.push_back({im.id, im.prob, {class_external_contours(im.instances)}});
    }
    if (cr.present && !items.empty()) {
      cr.summary = pr_curve(items, options, jobs);
      r.mean_ods_f += cr.summary.ods_f;
      r.mean_ap += cr.summary.ap;
      ++present;
    }
    r.classes.push_back(std::move(cr));
  }
  if (present) {
    r.mean_ods_f /= static_cast<double>(present);
    r.mean_ap /= static_cast<double>(present);
  }
  return r;
}

void write_counts_csv(std::ostream& out, const PrSummary& s) {
  out << "image,threshold,tp,fp,sum_r_tp,sum_r_total\n";
  for (std::size_t i = 0; i < s.per_image.size(); ++i)
    for (std::size_t k = 0; k < s.thresholds.size(); ++k) {
      const auto& c = s.per_image[i][k];
      out << s.ids[i] << ',' << fmt_double(s.thresholds[k]) << ',' << c.tp << ',' << c.fp << ',' << c.sum_r_tp << ','
          << c.sum_r_total << '\n';
    }
}

void write_pr_points_csv(std::ostream& out, const PrSummary& s) {
  out << "threshold,precision,recall,f\n";
  for (std::size_t k = 0; k < s.points.size(); ++k)
    out << fmt_double(s.thresholds[k]) << ',' << fmt_double(s.points[k].precision) << ','
        << fmt_double(s.points[k].recall) << ',' << fmt_double(s.points[k].f) << '\n';
}

std::string summary_json(const PrSummary& s) {
  nlohmann::ordered_json j;
  j["ods"] = s.ods_f;
  j["ois"] = s.ois_f;
  j["ap"] = s.ap;
  j["ods_threshold"] = s.ods_threshold;
  j["ods_precision"] = s.ods_precision;
  j["ods_recall"] = s.ods_recall;
  j["ois_precision"] = s.ois_precision;
  j["ois_recall"] = s.ois_recall;
  j["n_images"] = s.per_image.size();
  j["n_thresh"] = s.thresholds.size();
  return j.dump(2);
}

}  // namespace weakbound
