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

#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace weakbound {

/// s-t min cut by search-tree augmenting paths (Boykov-Kolmogorov).
/// Capacities must be finite and non-negative.
class MaxFlowGraph {
 public:
  explicit MaxFlowGraph(int num_nodes = 0);

  int add_node();
  int num_nodes() const noexcept { return static_cast<int>(nodes_.size()); }

  /// Adds to the node's source and sink links. May be called repeatedly.
  void add_terminal(int node, double cap_source, double cap_sink);
  void add_edge(int a, int b, double cap_ab, double cap_ba);

  /// Runs to completion and returns the min-cut value.
  double solve();
  /// After solve(): true when the node ends on the source side of the cut.
  bool in_source_segment(int node) const;

 private:
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;

  struct Node {
    int first_arc = kNone;
    int parent = kNone;  // arc towards the parent, kTerminal, kOrphan or kNone
    bool is_sink = false;
    bool queued = false;
    double tr_cap = 0;  // > 0: residual from source, < 0: residual to sink
    std::int64_t ts = 0;
    int dist = 0;
  };
  struct Arc {
    int head;
    int next;
    double r_cap;
  };

  static int sister(int arc) noexcept { return arc ^ 1; }
  void activate(int node);
  int next_active();
  void augment(int middle);
  void process_source_orphan(int node);
  void process_sink_orphan(int node);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::vector<int> orphans_;
  double flow_ = 0;
  std::int64_t time_ = 0;
  bool solved_ = false;
};

}  // namespace weakbound
