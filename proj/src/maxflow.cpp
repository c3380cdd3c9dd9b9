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

#include "weakbound/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weakbound/errors.hpp"

namespace weakbound {
namespace {

void check_capacity(double c) {
  if (!(c >= 0) || !std::isfinite(c)) throw ParameterError("max_flow: capacities must be finite and >= 0");
}

void check_node(int node, std::size_t n) {
  if (node < 0 || static_cast<std::size_t>(node) >= n) throw ParameterError("max_flow: node index out of range");
}

}  // namespace

MaxFlowGraph::MaxFlowGraph(int num_nodes) : nodes_(static_cast<std::size_t>(std::max(0, num_nodes))) {}

int MaxFlowGraph::add_node() {
  nodes_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

void MaxFlowGraph::add_terminal(int node, double cap_source, double cap_sink) {
  check_node(node, nodes_.size());
  check_capacity(cap_source);
  check_capacity(cap_sink);
  // Flow common to both links is pushed immediately.
  flow_ += std::min(cap_source, cap_sink);
  nodes_[node].tr_cap += cap_source - cap_sink;
}

void MaxFlowGraph::add_edge(int a, int b, double cap_ab, double cap_ba) {
  check_node(a, nodes_.size());
  check_node(b, nodes_.size());
  check_capacity(cap_ab);
  check_capacity(cap_ba);
  if (a == b) return;
  const int ab = static_cast<int>(arcs_.size());
  arcs_.push_back(Arc{b, nodes_[a].first_arc, cap_ab});
  arcs_.push_back(Arc{a, nodes_[b].first_arc, cap_ba});
  nodes_[a].first_arc = ab;
  nodes_[b].first_arc = ab + 1;
}

void MaxFlowGraph::activate(int node) {
  if (!nodes_[node].queued) {
    nodes_[node].queued = true;
    active_.push_back(node);
  }
}

int MaxFlowGraph::next_active() {
  while (!active_.empty()) {
    const int i = active_.front();
    active_.pop_front();
    nodes_[i].queued = false;
    if (nodes_[i].parent != kNone) return i;
  }
  return kNone;
}

void MaxFlowGraph::augment(int middle) {
  double bottleneck = arcs_[middle].r_cap;
  // Source side: flow runs parent -> child along the sister of each parent arc.
  int i = arcs_[sister(middle)].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[sister(a)].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
  // Sink side: flow runs child -> parent along the parent arc.
  i = arcs_[middle].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[a].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

  arcs_[middle].r_cap -= bottleneck;
  arcs_[sister(middle)].r_cap += bottleneck;

  i = arcs_[sister(middle)].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    arcs_[a].r_cap += bottleneck;
    arcs_[sister(a)].r_cap -= bottleneck;
    if (arcs_[sister(a)].r_cap <= 0) {
      arcs_[sister(a)].r_cap = 0;
      nodes_[i].parent = kOrphan;
      orphans_.push_back(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap -= bottleneck;
  if (nodes_[i].tr_cap <= 0) {
    nodes_[i].tr_cap = 0;
    nodes_[i].parent = kOrphan;
    orphans_.push_back(i);
  }

  i = arcs_[middle].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    arcs_[sister(a)].r_cap += bottleneck;
    arcs_[a].r_cap -= bottleneck;
    if (arcs_[a].r_cap <= 0) {
      arcs_[a].r_cap = 0;
      nodes_[i].parent = kOrphan;
      orphans_.push_back(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap += bottleneck;
  if (nodes_[i].tr_cap >= 0) {
    nodes_[i].tr_cap = 0;
    nodes_[i].parent = kOrphan;
    orphans_.push_back(i);
  }
  flow_ += bottleneck;
}

void MaxFlowGraph::process_source_orphan(int i) {
  int best_arc = kNone;
  int best_dist = std::numeric_limits<int>::max();
  for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
    if (arcs_[sister(a)].r_cap <= 0) continue;
    int j = arcs_[a].head;
    if (nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
    // Walk to the root to check that j is still rooted at the source.
    int d = 0;
    for (;;) {
      if (nodes_[j].ts == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int p = nodes_[j].parent;
      ++d;
      if (p == kTerminal) {
        nodes_[j].ts = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (p == kOrphan) {
        d = std::numeric_limits<int>::max();
        break;
      }
      j = arcs_[p].head;
    }
    if (d == std::numeric_limits<int>::max()) continue;
    if (d < best_dist) {
      best_arc = a;
      best_dist = d;
    }
    // Stamp the path so later walks stop early.
    for (j = arcs_[a].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
      nodes_[j].ts = time_;
      nodes_[j].dist = d--;
    }
  }
  if (best_arc != kNone) {
    nodes_[i].parent = best_arc;
    nodes_[i].ts = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }
  nodes_[i].parent = kNone;
  for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
    const int j = arcs_[a].head;
    if (nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
    if (arcs_[sister(a)].r_cap > 0) activate(j);
    const int p = nodes_[j].parent;
    if (p != kTerminal && p != kOrphan && arcs_[p].head == i) {
      nodes_[j].parent = kOrphan;
      orphans_.push_back(j);
    }
  }
}

void MaxFlowGraph::process_sink_orphan(int i) {
  int best_arc = kNone;
  int best_dist = std::numeric_limits<int>::max();
  for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
    if (arcs_[a].r_cap <= 0) continue;
    int j = arcs_[a].head;
    if (!nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
    int d = 0;
    for (;;) {
      if (nodes_[j].ts == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int p = nodes_[j].parent;
      ++d;
      if (p == kTerminal) {
        nodes_[j].ts = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (p == kOrphan) {
        d = std::numeric_limits<int>::max();
        break;
      }
      j = arcs_[p].head;
    }
    if (d == std::numeric_limits<int>::max()) continue;
    if (d < best_dist) {
      best_arc = a;
      best_dist = d;
    }
    for (j = arcs_[a].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
      nodes_[j].ts = time_;
      nodes_[j].dist = d--;
    }
  }
  if (best_arc != kNone) {
    nodes_[i].parent = best_arc;
    nodes_[i].ts = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }
  nodes_[i].parent = kNone;
  for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
    const int j = arcs_[a].head;
    if (!nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
    if (arcs_[a].r_cap > 0) activate(j);
    const int p = nodes_[j].parent;
    if (p != kTerminal && p != kOrphan && arcs_[p].head == i) {
      nodes_[j].parent = kOrphan;
      orphans_.push_back(j);
    }
  }
}

double MaxFlowGraph::solve() {
  if (solved_) return flow_;
  for (int i = 0; i < num_nodes(); ++i) {
    Node& n = nodes_[i];
    if (n.tr_cap != 0) {
      n.is_sink = n.tr_cap < 0;
      n.parent = kTerminal;
      n.ts = 0;
      n.dist = 1;
      activate(i);
    }
  }

  int current = kNone;
  for (;;) {
    int i = current;
    if (i == kNone || nodes_[i].parent == kNone) {
      i = next_active();
      if (i == kNone) break;
    }
    current = kNone;

    int middle = kNone;
    if (!nodes_[i].is_sink) {
      for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
        if (arcs_[a].r_cap <= 0) continue;
        const int j = arcs_[a].head;
        Node& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.is_sink = false;
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
          activate(j);
        } else if (nj.is_sink) {
          middle = a;
          break;
        } else if (nj.ts <= nodes_[i].ts && nj.dist > nodes_[i].dist) {
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
        }
      }
    } else {
      for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
        if (arcs_[sister(a)].r_cap <= 0) continue;
        const int j = arcs_[a].head;
        Node& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.is_sink = true;
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
          activate(j);
        } else if (!nj.is_sink) {
          middle = sister(a);
          break;
        } else if (nj.ts <= nodes_[i].ts && nj.dist > nodes_[i].dist) {
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
        }
      }
    }

    ++time_;
    if (middle == kNone) continue;

    // Keep expanding the same node after the tree repair.
    current = i;
    augment(middle);
    while (!orphans_.empty()) {
      const int o = orphans_.back();
      orphans_.pop_back();
      if (nodes_[o].is_sink)
        process_sink_orphan(o);
      else
        process_source_orphan(o);
    }
  }
  solved_ = true;
  return flow_;
}

bool MaxFlowGraph::in_source_segment(int node) const {
  const Node& n = nodes_[node];
  return n.parent != kNone && !n.is_sink;
}

}  // namespace weakbound
