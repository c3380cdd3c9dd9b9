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

#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "weakbound/bench.hpp"

using namespace weakbound;

namespace {

ProbMap as_prob(const BinaryMap& b) {
  ProbMap p(b.width(), b.height(), 0.f);
  for (std::size_t i = 0; i < b.size(); ++i) p[i] = b[i] ? 1.f : 0.f;
  return p;
}

BinaryMap square_contour(int w, int h, const Rect& r) {
  BinaryMap m(w, h, 0);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) m(x, y) = 1;
  return mask_contour(m);
}

}  // namespace

TEST_CASE("correspond identities") {
  const BinaryMap gt = square_contour(20, 20, {4, 4, 15, 15});
  const std::vector<BinaryMap> gts{gt};
  const MatchCounts same = correspond(gt, gts, 0.01);
  const auto n = static_cast<std::int64_t>(count_equal(gt, std::uint8_t{1}));
  CHECK(same == MatchCounts{n, 0, n, n});
  const MatchCounts empty = correspond(BinaryMap(20, 20, 0), gts, 0.01);
  CHECK(empty == MatchCounts{0, 0, 0, n});
  CHECK_THROWS_AS(correspond(BinaryMap(3, 3, 0), gts, 0.01), ParameterError);
  CHECK_THROWS_AS(correspond(gt, gts, 0.0), ParameterError);
}

TEST_CASE("correspond equals the assignment oracle on small maps") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = rng.between(1, 6), h = rng.between(1, 6);
    const BinaryMap c = oracle::random_binary(rng, w, h, rng.uniform(0.05, 0.9));
    const BinaryMap g = oracle::random_binary(rng, w, h, rng.uniform(0.05, 0.9));
    const double md = rng.uniform(0.01, 0.6);
    const std::vector<BinaryMap> gts{g};
    const MatchCounts mc = correspond(c, gts, md);
    const int best = oracle::max_matching(c, g, md);
    CHECK(mc.tp == best);
    CHECK(mc.sum_r_tp == best);
    CHECK(mc.fp == static_cast<std::int64_t>(count_equal(c, std::uint8_t{1})) - best);
    CHECK(mc.sum_r_total == static_cast<std::int64_t>(count_equal(g, std::uint8_t{1})));
  }
}

TEST_CASE("multiple GT maps are matched independently for recall") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = rng.between(2, 6), h = rng.between(2, 6);
    const BinaryMap c = oracle::random_binary(rng, w, h, 0.4);
    const std::vector<BinaryMap> gts{oracle::random_binary(rng, w, h, 0.3), oracle::random_binary(rng, w, h, 0.3)};
    const double md = rng.uniform(0.05, 0.4);
    const MatchCounts mc = correspond(c, gts, md);
    const int m0 = oracle::max_matching(c, gts[0], md), m1 = oracle::max_matching(c, gts[1], md);
    CHECK(mc.sum_r_tp == m0 + m1);
    CHECK(mc.tp >= std::max(m0, m1));
    CHECK(mc.tp <= std::min<std::int64_t>(m0 + m1, mc.tp + mc.fp));
  }
}

TEST_CASE("correspond is translation invariant and monotone in tolerance") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMap c = oracle::random_binary(rng, 6, 6, 0.3), g = oracle::random_binary(rng, 6, 6, 0.3);
    const double radius = 1.7;
    const std::vector<BinaryMap> gts{g};
    const MatchCounts base = correspond(c, gts, radius / std::hypot(6, 6));
    BinaryMap c2(16, 13, 0), g2(16, 13, 0);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        c2(x + 7, y + 4) = c(x, y);
        g2(x + 7, y + 4) = g(x, y);
      }
    const std::vector<BinaryMap> gts2{g2};
    CHECK(correspond(c2, gts2, radius / std::hypot(16, 13)) == base);
    std::int64_t prev = -1;
    for (double md : {0.02, 0.1, 0.2, 0.3, 0.5, 0.9}) {
      const auto tp = correspond(c, gts, md).tp;
      CHECK(tp >= prev);
      prev = tp;
    }
  }
}

TEST_CASE("nms thins bands and preserves thin lines") {
  CHECK(count_equal(nms_thin(ProbMap(12, 12, 0.f)), 0.f) == 144);
  ProbMap band(21, 21, 0.f);
  for (int y = 0; y < 21; ++y)
    for (int x = 9; x < 12; ++x) band(x, y) = 0.8f;
  const ProbMap t = nms_thin(band);
  for (int y = 4; y < 17; ++y) {
    int n = 0;
    for (int x = 0; x < 21; ++x) n += t(x, y) > 0;
    CHECK(n == 1);
    CHECK(t(10, y) == 0.8f);
  }
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] <= band[i]);

  ProbMap line(21, 21, 0.f);
  for (int y = 0; y < 21; ++y) line(6, y) = 0.5f;
  const ProbMap l = nms_thin(line);
  for (int y = 2; y < 19; ++y)
    for (int x = 0; x < 21; ++x) CHECK(l(x, y) == line(x, y));

  Rng rng(12);
  ProbMap r(17, 15);
  for (auto& v : r.pixels()) v = static_cast<float>(rng.uniform());
  const ProbMap rt = nms_thin(r);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK((rt[i] == 0.f || rt[i] == r[i]));
}

TEST_CASE("binary thinning") {
  BinaryMap line(10, 10, 0);
  for (int x = 1; x < 9; ++x) line(x, 4) = 1;
  CHECK(thin_binary(line) == line);
  BinaryMap thick(12, 12, 0);
  for (int y = 2; y < 10; ++y)
    for (int x = 4; x < 7; ++x) thick(x, y) = 1;
  const BinaryMap t = thin_binary(thick);
  CHECK(count_equal(t, std::uint8_t{1}) < count_equal(thick, std::uint8_t{1}));
  CHECK(count_equal(t, std::uint8_t{1}) > 0);
  for (int y = 0; y + 1 < 12; ++y)
    for (int x = 0; x + 1 < 12; ++x) CHECK_FALSE((t(x, y) && t(x + 1, y) && t(x, y + 1) && t(x + 1, y + 1)));
}

TEST_CASE("precision-recall identities") {
  const PrPoint half = pr_point({1, 1, 1, 2});
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK(half.f == 0.5);
  CHECK(pr_point({}).f == 0.0);

  const BinaryMap gt = square_contour(30, 30, {5, 8, 22, 25});
  const std::vector<EvalItem> perfect{{"a", as_prob(gt), {gt}}};
  const PrSummary s = pr_curve(perfect);
  CHECK(s.ods_f == 1.0);
  CHECK(s.ois_f == 1.0);
  CHECK(s.ap == 1.0);

  const std::vector<EvalItem> zero{{"a", ProbMap(30, 30, 0.f), {gt}}};
  const PrSummary z = pr_curve(zero);
  CHECK(z.ods_f == 0.0);
  CHECK(z.ois_f == 0.0);
  CHECK(z.ap == 0.0);
  CHECK_THROWS_AS(pr_curve({}), ParameterError);
}

TEST_CASE("ODS never exceeds OIS on random runs") {
  Rng rng(30);
  for (int run = 0; run < 10; ++run) {
    std::vector<EvalItem> items;
    for (int i = 0; i < 4; ++i) {
      const BinaryMap gt = square_contour(24, 24, {rng.between(1, 8), rng.between(1, 8), rng.between(12, 23), rng.between(12, 23)});
      ProbMap p(24, 24, 0.f);
      for (std::size_t k = 0; k < p.size(); ++k)
        p[k] = static_cast<float>(gt[k] ? rng.uniform(0.2, 1.0) : (rng.uniform() < 0.1 ? rng.uniform() : 0.0));
      items.push_back({"i" + std::to_string(i), p, {gt}});
    }
    PrOptions o;
    o.n_thresh = 20;
    const PrSummary s = pr_curve(items, o);
    CHECK(s.ods_f <= s.ois_f + 1e-12);
    CHECK(s.ap >= 0.0);
    CHECK(s.ap <= 1.0);
  }
}

TEST_CASE("halving every score leaves the curve unchanged under relative thresholds") {
  const BinaryMap gt = square_contour(26, 26, {3, 3, 20, 21});
  Rng rng(44);
  ProbMap p(26, 26);
  for (auto& v : p.pixels()) v = static_cast<float>(rng.uniform());
  ProbMap h = p;
  for (auto& v : h.pixels()) v *= 0.5f;
  const std::vector<EvalItem> a{{"x", p, {gt}}}, b{{"x", h, {gt}}};
  std::ostringstream pa, pb;
  write_pr_points_csv(pa, pr_curve(a));
  write_pr_points_csv(pb, pr_curve(b));
  CHECK(pa.str() == pb.str());
}

TEST_CASE("SBD uses external contours only") {
  LabelMap inst(40, 40, 0);
  for (int y = 5; y < 30; ++y)
    for (int x = 5; x < 30; ++x) inst(x, y) = 1;
  for (int y = 12; y < 22; ++y)
    for (int x = 12; x < 22; ++x) inst(x, y) = 2;
  const BinaryMap ext = class_external_contours(inst);
  const BinaryMap internal = square_contour(40, 40, {12, 12, 22, 22});

  const std::vector<std::pair<int, std::vector<ClassImage>>> exact{{7, {{"a", as_prob(ext), inst}}}};
  const SbdResult r = sbd_eval(exact);
  REQUIRE(r.classes.size() == 1);
  CHECK(r.classes[0].present);
  CHECK(r.classes[0].summary.ods_f == 1.0);

  const std::vector<std::pair<int, std::vector<ClassImage>>> inner{{7, {{"a", as_prob(internal), inst}}}};
  CHECK(sbd_eval(inner).classes[0].summary.ods_f == 0.0);

  const std::vector<std::pair<int, std::vector<ClassImage>>> blank{{1, {{"a", ProbMap(40, 40, 0.f), inst}}},
                                                                   {2, {{"a", ProbMap(40, 40, 0.f), LabelMap(40, 40, 0)}}}};
  const SbdResult e = sbd_eval(blank);
  CHECK(e.mean_ap == 0.0);
  CHECK_FALSE(e.classes[1].present);

  const std::vector<std::pair<int, std::vector<ClassImage>>> mixed{{1, {{"a", as_prob(ext), inst}}},
                                                                   {2, {{"a", ProbMap(40, 40, 0.f), LabelMap(40, 40, 0)}}}};
  CHECK(sbd_eval(mixed).mean_ods_f == 1.0);
}

TEST_CASE("report formats") {
  const BinaryMap gt = square_contour(10, 10, {2, 2, 8, 8});
  PrOptions o;
  o.n_thresh = 3;
  const PrSummary s = pr_curve(std::vector<EvalItem>{{"img", as_prob(gt), {gt}}}, o);
  std::ostringstream counts, pts;
  write_counts_csv(counts, s);
  write_pr_points_csv(pts, s);
  CHECK(counts.str().rfind("image,threshold,tp,fp,sum_r_tp,sum_r_total\nimg,0.250000,20,0,20,20\n", 0) == 0);
  CHECK(pts.str().rfind("threshold,precision,recall,f\n0.250000,1.000000,1.000000,1.000000\n", 0) == 0);
  const std::string js = summary_json(s);
  CHECK(js.find("\"ods\"") < js.find("\"ois\""));
  CHECK(js.find("\"ois\"") < js.find("\"ap\""));
  CHECK(summary_json(s) == js);
}
