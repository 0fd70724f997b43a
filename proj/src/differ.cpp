// Copyright 2026 The CtxBugGen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctxbug/differ.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace ctxbug::differ {

namespace {

const std::set<std::string, std::less<>>& OperatorKinds() {
  static const auto* kinds = new std::set<std::string, std::less<>>{
      "+",   "-",   "*",   "/",   "//",  "%",   "**",  "@",      "|",  "&",
      "^",   "~",   "<<",  ">>",  "<",   "<=",  ">",   ">=",     "==", "!=",
      "<>",  "in",  "is",  "not in", "is not", "and", "or", "not", "+=", "-=",
      "*=",  "/=",  "//=", "%=",  "**=", "@=",  "|=",  "&=",     "^=", "<<=",
      ">>="};
  return *kinds;
}

// Longest common subsequence of two id lists under `equal`; returns index
// pairs in order.
std::vector<std::pair<int, int>> Lcs(const std::vector<int>& a,
                                     const std::vector<int>& b,
                                     const std::function<bool(int, int)>& equal) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      dp[i][j] = equal(a[i], b[j]) ? dp[i + 1][j + 1] + 1
                                   : std::max(dp[i + 1][j], dp[i][j + 1]);
    }
  }
  std::vector<std::pair<int, int>> out;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (equal(a[i], b[j])) {
      out.emplace_back(a[i], b[j]);
      ++i;
      ++j;
    } else if (dp[i + 1][j] >= dp[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

int IndexInParent(const std::vector<DiffTree::Node>& nodes, int id) {
  int parent = nodes[id].parent;
  if (parent < 0) return 0;
  const auto& siblings = nodes[parent].children;
  return static_cast<int>(std::find(siblings.begin(), siblings.end(), id) -
                          siblings.begin());
}

class Matcher {
 public:
  Matcher(const DiffTree& src, const DiffTree& dst, const DiffOptions& options)
      : src_(src), dst_(dst), options_(options) {
    mapping_.src_to_dst.assign(src.size(), -1);
    mapping_.dst_to_src.assign(dst.size(), -1);
    Intern(src, src_iso_, src_struct_);
    Intern(dst, dst_iso_, dst_struct_);
    for (int c : src_iso_) ++src_iso_count_[c];
    for (int c : dst_iso_) ++dst_iso_count_[c];
  }

  Mapping Run() {
    if (src_.size() == 0 || dst_.size() == 0) return mapping_;
    TopDown();
    BottomUp();
    return mapping_;
  }

 private:
  // Class ids shared by both trees: equal iso ids mean isomorphic subtrees
  // with equal labels, equal struct ids mean equal shape and types.
  void Intern(const DiffTree& tree, std::vector<int>& iso, std::vector<int>& shape) {
    iso.assign(tree.size(), 0);
    shape.assign(tree.size(), 0);
    for (int id : tree.PostOrder()) {
      const auto& n = tree.node(id);
      std::vector<int> iso_children, shape_children;
      for (int c : n.children) {
        iso_children.push_back(iso[c]);
        shape_children.push_back(shape[c]);
      }
      iso[id] = iso_ids_
                    .try_emplace({n.type, n.label, std::move(iso_children)},
                                 static_cast<int>(iso_ids_.size()))
                    .first->second;
      shape[id] = struct_ids_
                      .try_emplace({n.type, std::move(shape_children)},
                                   static_cast<int>(struct_ids_.size()))
                      .first->second;
    }
  }

  bool SrcMatched(int s) const { return mapping_.src_to_dst[s] >= 0; }
  bool DstMatched(int d) const { return mapping_.dst_to_src[d] >= 0; }

  void Add(int s, int d) {
    mapping_.src_to_dst[s] = d;
    mapping_.dst_to_src[d] = s;
  }

  // Pairs nodes of two subtrees with identical shape, in pre-order.
  void AddRecursive(int s, int d) {
    Add(s, d);
    const auto& sc = src_.node(s).children;
    const auto& dc = dst_.node(d).children;
    for (std::size_t i = 0; i < sc.size() && i < dc.size(); ++i) {
      AddRecursive(sc[i], dc[i]);
    }
  }

  std::vector<int> Descendants(const DiffTree& tree, int id) const {
    std::vector<int> out;
    std::vector<int> stack(tree.node(id).children.rbegin(),
                           tree.node(id).children.rend());
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      out.push_back(n);
      const auto& c = tree.node(n).children;
      stack.insert(stack.end(), c.rbegin(), c.rend());
    }
    return out;
  }

  double Dice(int s, int d) const {
    if (s < 0 || d < 0) return 0.0;
    auto sd = Descendants(src_, s);
    int dst_desc = dst_.node(d).size - 1;
    if (sd.empty() && dst_desc == 0) return 0.0;
    int common = 0;
    for (int n : sd) {
      int partner = mapping_.src_to_dst[n];
      if (partner >= 0 && partner != d && dst_.IsDescendantOrSelf(partner, d)) {
        ++common;
      }
    }
    return 2.0 * common / static_cast<double>(sd.size() + dst_desc);
  }

  // Max-height priority list; ties in pre-order.
  class HeightQueue {
   public:
    explicit HeightQueue(const DiffTree& tree) : tree_(tree) {}
    void Push(int id) { queue_.emplace(tree_.node(id).height, -id); }
    void Open(int id) {
      for (int c : tree_.node(id).children) Push(c);
    }
    int PeekHeight() const { return queue_.empty() ? -1 : queue_.top().first; }
    std::vector<int> PopAll() {
      std::vector<int> out;
      int h = PeekHeight();
      while (!queue_.empty() && queue_.top().first == h) {
        out.push_back(-queue_.top().second);
        queue_.pop();
      }
      return out;
    }

   private:
    const DiffTree& tree_;
    std::priority_queue<std::pair<int, int>> queue_;
  };

  void TopDown() {
    HeightQueue l1(src_), l2(dst_);
    l1.Push(0);
    l2.Push(0);
    std::vector<std::pair<int, int>> candidates;
    std::unordered_set<int> src_in_candidates, dst_in_candidates;
    while (std::min(l1.PeekHeight(), l2.PeekHeight()) >= options_.min_height) {
      int h1 = l1.PeekHeight(), h2 = l2.PeekHeight();
      if (h1 != h2) {
        if (h1 > h2) {
          for (int t : l1.PopAll()) l1.Open(t);
        } else {
          for (int t : l2.PopAll()) l2.Open(t);
        }
        continue;
      }
      auto set1 = l1.PopAll();
      auto set2 = l2.PopAll();
      for (int t1 : set1) {
        for (int t2 : set2) {
          if (src_iso_[t1] != dst_iso_[t2]) continue;
          int cls = src_iso_[t1];
          if (dst_iso_count_[cls] > 1 || src_iso_count_[cls] > 1) {
            candidates.emplace_back(t1, t2);
            src_in_candidates.insert(t1);
            dst_in_candidates.insert(t2);
          } else if (!SrcMatched(t1) && !DstMatched(t2)) {
            AddRecursive(t1, t2);
          }
        }
      }
      for (int t1 : set1) {
        if (!SrcMatched(t1) && !src_in_candidates.contains(t1)) l1.Open(t1);
      }
      for (int t2 : set2) {
        if (!DstMatched(t2) && !dst_in_candidates.contains(t2)) l2.Open(t2);
      }
    }

    struct Ranked {
      double dice;
      bool same_index;
      int t1, t2;
    };
    std::vector<Ranked> ranked;
    for (auto [t1, t2] : candidates) {
      ranked.push_back({Dice(src_.node(t1).parent, dst_.node(t2).parent),
                        IndexInParent(src_.nodes(), t1) ==
                            IndexInParent(dst_.nodes(), t2),
                        t1, t2});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      return std::tie(b.dice, b.same_index, a.t1, a.t2) <
             std::tie(a.dice, a.same_index, b.t1, b.t2);
    });
    for (const auto& r : ranked) {
      if (!SrcMatched(r.t1) && !DstMatched(r.t2)) AddRecursive(r.t1, r.t2);
    }
  }

  std::vector<int> DstCandidates(int s) const {
    std::vector<int> seeds;
    for (int n : Descendants(src_, s)) {
      if (SrcMatched(n)) seeds.push_back(mapping_.src_to_dst[n]);
    }
    std::set<int> visited;
    std::vector<int> out;
    for (int seed : seeds) {
      for (int p = dst_.node(seed).parent; p >= 0; p = dst_.node(p).parent) {
        if (!visited.insert(p).second) break;
        if (p != 0 && dst_.node(p).type == src_.node(s).type && !DstMatched(p)) {
          out.push_back(p);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void BottomUp() {
    for (int t1 : src_.PostOrder()) {
      if (t1 == 0) {
        if (!SrcMatched(0) && !DstMatched(0) &&
            src_.node(0).type == dst_.node(0).type) {
          Add(0, 0);
        }
        if (mapping_.src_to_dst[0] == 0) Recover(0, 0);
        break;
      }
      if (SrcMatched(t1) || src_.node(t1).children.empty()) continue;
      int best = -1;
      double best_dice = -1.0;
      bool best_same_index = false;
      for (int t2 : DstCandidates(t1)) {
        double dice = Dice(t1, t2);
        bool same_index =
            IndexInParent(src_.nodes(), t1) == IndexInParent(dst_.nodes(), t2);
        if (dice > best_dice || (dice == best_dice && same_index && !best_same_index)) {
          best = t2;
          best_dice = dice;
          best_same_index = same_index;
        }
      }
      if (best >= 0 && best_dice > options_.min_dice) {
        Add(t1, best);
        Recover(t1, best);
      }
    }
  }

  std::vector<int> UnmatchedSrcChildren(int s) const {
    std::vector<int> out;
    for (int c : src_.node(s).children) {
      if (!SrcMatched(c)) out.push_back(c);
    }
    return out;
  }
  std::vector<int> UnmatchedDstChildren(int d) const {
    std::vector<int> out;
    for (int c : dst_.node(d).children) {
      if (!DstMatched(c)) out.push_back(c);
    }
    return out;
  }

  // Matches leftover children of a matched pair: isomorphic LCS, then
  // shape-only LCS, then unique-type pairs with recursion.
  void Recover(int s, int d) {
    for (auto [a, b] : Lcs(UnmatchedSrcChildren(s), UnmatchedDstChildren(d),
                           [&](int x, int y) {
                             return src_iso_[x] == dst_iso_[y];
                           })) {
      AddRecursive(a, b);
    }
    for (auto [a, b] : Lcs(UnmatchedSrcChildren(s), UnmatchedDstChildren(d),
                           [&](int x, int y) {
                             return src_struct_[x] == dst_struct_[y];
                           })) {
      AddRecursive(a, b);
    }
    std::map<std::string, std::vector<int>> src_by_type, dst_by_type;
    for (int c : UnmatchedSrcChildren(s)) src_by_type[src_.node(c).type].push_back(c);
    for (int c : UnmatchedDstChildren(d)) dst_by_type[dst_.node(c).type].push_back(c);
    std::vector<std::pair<int, int>> unique_pairs;
    for (const auto& [type, list] : src_by_type) {
      auto it = dst_by_type.find(type);
      if (list.size() == 1 && it != dst_by_type.end() && it->second.size() == 1) {
        unique_pairs.emplace_back(list.front(), it->second.front());
      }
    }
    std::sort(unique_pairs.begin(), unique_pairs.end());
    for (auto [a, b] : unique_pairs) {
      Add(a, b);
      Recover(a, b);
    }
  }

  const DiffTree& src_;
  const DiffTree& dst_;
  DiffOptions options_;
  Mapping mapping_;
  std::map<std::tuple<std::string, std::string, std::vector<int>>, int> iso_ids_;
  std::map<std::pair<std::string, std::vector<int>>, int> struct_ids_;
  std::vector<int> src_iso_, dst_iso_, src_struct_, dst_struct_;
  std::map<int, int> src_iso_count_, dst_iso_count_;
};

// Mutable tree used to generate and to replay edit scripts.
struct WorkTree {
  struct WNode {
    std::string type;
    std::string label;
    int parent = -1;
    std::vector<int> children;
  };
  std::vector<WNode> nodes;
  int root = -1;

  // Copies `tree` and puts a synthetic root (id n) above it.
  static WorkTree From(const DiffTree& tree) {
    WorkTree w;
    for (const auto& n : tree.nodes()) {
      w.nodes.push_back({n.type, n.label, n.parent, n.children});
    }
    int fake = static_cast<int>(w.nodes.size());
    w.nodes.push_back({"<root>", "", -1, {}});
    if (fake > 0) {
      w.nodes[0].parent = fake;
      w.nodes[fake].children.push_back(0);
    }
    w.root = fake;
    return w;
  }

  int Index(int id) const {
    const auto& siblings = nodes[nodes[id].parent].children;
    return static_cast<int>(std::find(siblings.begin(), siblings.end(), id) -
                            siblings.begin());
  }

  void Detach(int id) {
    auto& siblings = nodes[nodes[id].parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), id));
    nodes[id].parent = -1;
  }

  void Attach(int id, int parent, int position) {
    auto& siblings = nodes[parent].children;
    position = std::clamp(position, 0, static_cast<int>(siblings.size()));
    siblings.insert(siblings.begin() + position, id);
    nodes[id].parent = parent;
  }

  void Serialize(int id, std::string* out) const {
    const auto& n = nodes[id];
    *out += '(';
    *out += n.type;
    if (!n.label.empty()) {
      *out += ':';
      *out += std::to_string(n.label.size());
      *out += ':';
      *out += n.label;
    }
    for (int c : n.children) Serialize(c, out);
    *out += ')';
  }

  void Apply(const EditAction& action) {
    switch (action.kind) {
      case EditAction::Kind::kInsert: {
        if (action.node >= static_cast<int>(nodes.size())) {
          nodes.resize(action.node + 1);
        }
        nodes[action.node] = {action.type, action.label, -1, {}};
        Attach(action.node, action.parent, action.position);
        break;
      }
      case EditAction::Kind::kDelete:
        Detach(action.node);
        break;
      case EditAction::Kind::kUpdate:
        nodes[action.node].label = action.label;
        break;
      case EditAction::Kind::kMove:
        Detach(action.node);
        Attach(action.node, action.parent, action.position);
        break;
    }
  }
};

class ScriptGenerator {
 public:
  ScriptGenerator(const DiffTree& src, const DiffTree& dst, const Mapping& mapping)
      : src_(src), dst_(dst), cpy_(WorkTree::From(src)), dstw_(WorkTree::From(dst)) {
    cpy_to_dst_.assign(cpy_.nodes.size(), -1);
    dst_to_cpy_.assign(dstw_.nodes.size(), -1);
    for (int s = 0; s < src.size(); ++s) {
      int d = mapping.src_to_dst[s];
      if (d >= 0) Map(s, d);
    }
    Map(cpy_.root, dstw_.root);
    script_.source_size = src.size();
  }

  EditScript Run() {
    std::deque<int> bfs{dstw_.root};
    while (!bfs.empty()) {
      int x = bfs.front();
      bfs.pop_front();
      for (int c : dstw_.nodes[x].children) bfs.push_back(c);
      if (x == dstw_.root) {
        AlignChildren(cpy_.root, x);
        continue;
      }
      int y = dstw_.nodes[x].parent;
      int z = dst_to_cpy_[y];
      int w = dst_to_cpy_[x];
      if (w < 0) {
        int k = FindPos(x);
        w = static_cast<int>(cpy_.nodes.size());
        cpy_to_dst_.push_back(-1);
        EditAction a{EditAction::Kind::kInsert, w, z, k, dstw_.nodes[x].type,
                     dstw_.nodes[x].label, x};
        script_.actions.push_back(a);
        cpy_.Apply(a);
        Map(w, x);
      } else {
        int v = cpy_.nodes[w].parent;
        if (cpy_.nodes[w].label != dstw_.nodes[x].label) {
          EditAction a{EditAction::Kind::kUpdate, w, -1, 0, "", dstw_.nodes[x].label, x};
          script_.actions.push_back(a);
          cpy_.Apply(a);
        }
        if (z != v) {
          int k = MovePosition(w, z, FindPos(x));
          EditAction a{EditAction::Kind::kMove, w, z, k, "", "", x};
          script_.actions.push_back(a);
          cpy_.Apply(a);
        }
      }
      src_in_order_.insert(w);
      dst_in_order_.insert(x);
      AlignChildren(w, x);
    }
    std::vector<int> doomed;
    PostOrder(cpy_.root, &doomed);
    for (int w : doomed) {
      if (cpy_to_dst_[w] < 0) {
        EditAction a{EditAction::Kind::kDelete, w, -1, 0, "", "", -1};
        script_.actions.push_back(a);
        cpy_.Apply(a);
      }
    }
    return std::move(script_);
  }

 private:
  void Map(int c, int d) {
    cpy_to_dst_[c] = d;
    dst_to_cpy_[d] = c;
  }

  void PostOrder(int id, std::vector<int>* out) const {
    for (int c : cpy_.nodes[id].children) PostOrder(c, out);
    out->push_back(id);
  }

  int FindPos(int x) const {
    int y = dstw_.nodes[x].parent;
    const auto& siblings = dstw_.nodes[y].children;
    for (int c : siblings) {
      if (dst_in_order_.contains(c)) {
        if (c == x) return 0;
        break;
      }
    }
    int xpos = dstw_.Index(x);
    int v = -1;
    for (int i = 0; i < xpos; ++i) {
      if (dst_in_order_.contains(siblings[i])) v = siblings[i];
    }
    if (v < 0) return 0;
    int u = dst_to_cpy_[v];
    return cpy_.Index(u) + 1;
  }

  // FindPos counts the moved node itself when it precedes the anchor in
  // the same parent; the recorded position is taken after detaching.
  int MovePosition(int node, int new_parent, int k) const {
    if (cpy_.nodes[node].parent == new_parent && cpy_.Index(node) < k) return k - 1;
    return k;
  }

  void AlignChildren(int w, int x) {
    for (int c : cpy_.nodes[w].children) src_in_order_.erase(c);
    for (int c : dstw_.nodes[x].children) dst_in_order_.erase(c);
    std::vector<int> s1, s2;
    for (int c : cpy_.nodes[w].children) {
      int partner = cpy_to_dst_[c];
      if (partner >= 0 && dstw_.nodes[partner].parent == x) s1.push_back(c);
    }
    for (int c : dstw_.nodes[x].children) {
      int partner = dst_to_cpy_[c];
      if (partner >= 0 && cpy_.nodes[partner].parent == w) s2.push_back(c);
    }
    auto lcs = Lcs(s1, s2, [&](int a, int b) { return cpy_to_dst_[a] == b; });
    std::set<std::pair<int, int>> in_lcs(lcs.begin(), lcs.end());
    for (auto [a, b] : lcs) {
      src_in_order_.insert(a);
      dst_in_order_.insert(b);
    }
    for (int b : s2) {
      for (int a : s1) {
        if (cpy_to_dst_[a] == b && !in_lcs.contains({a, b})) {
          int k = MovePosition(a, w, FindPos(b));
          EditAction act{EditAction::Kind::kMove, a, w, k, "", "", b};
          script_.actions.push_back(act);
          cpy_.Apply(act);
          src_in_order_.insert(a);
          dst_in_order_.insert(b);
        }
      }
    }
  }

  const DiffTree& src_;
  const DiffTree& dst_;
  WorkTree cpy_;
  WorkTree dstw_;
  std::vector<int> cpy_to_dst_;
  std::vector<int> dst_to_cpy_;
  std::set<int> src_in_order_;
  std::set<int> dst_in_order_;
  EditScript script_;
};

}  // namespace

std::string CompatClass(std::string_view kind) {
  if (OperatorKinds().contains(kind)) return "op";
  if (kind == "integer" || kind == "float" || kind == "true" || kind == "false" ||
      kind == "none") {
    return "literal";
  }
  return std::string(kind);
}

DiffTree DiffTree::FromSyntax(const syntax::Tree& tree) {
  DiffTree out;
  out.source_ = tree.source();
  std::function<void(const syntax::Node&, int)> add = [&](const syntax::Node& n,
                                                          int parent) {
    int id = out.AddNode(CompatClass(n.kind),
                         n.children.empty()
                             ? std::string(syntax::NodeText(tree, n))
                             : std::string(),
                         parent);
    out.nodes_[id].span = n.span;
    out.nodes_[id].path = n.path;
    for (const auto& c : n.children) add(c, id);
  };
  add(tree.root(), -1);
  out.Finalize();
  return out;
}

int DiffTree::AddNode(std::string type, std::string label, int parent) {
  int id = static_cast<int>(nodes_.size());
  Node n;
  n.type = std::move(type);
  n.label = std::move(label);
  n.parent = parent;
  if (parent >= 0) {
    n.path = nodes_[parent].path;
    n.path.push_back(static_cast<std::uint32_t>(nodes_[parent].children.size()));
    nodes_[parent].children.push_back(id);
  }
  nodes_.push_back(std::move(n));
  return id;
}

void DiffTree::Finalize() {
  for (int id : PostOrder()) {
    Node& n = nodes_[id];
    n.height = 1;
    n.size = 1;
    for (int c : n.children) {
      n.height = std::max(n.height, nodes_[c].height + 1);
      n.size += nodes_[c].size;
    }
  }
}

std::string DiffTree::Text(int id) const {
  const Node& n = nodes_[id];
  if (!source_.empty() || n.span.end > 0) {
    return source_.substr(n.span.start, n.span.size());
  }
  std::string out;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    if (nodes_[c].children.empty()) out += nodes_[c].label;
    stack.insert(stack.end(), nodes_[c].children.rbegin(), nodes_[c].children.rend());
  }
  return out;
}

int DiffTree::FindPath(const syntax::NodePath& path) const {
  if (nodes_.empty()) return -1;
  int id = 0;
  for (std::uint32_t index : path) {
    if (index >= nodes_[id].children.size()) return -1;
    id = nodes_[id].children[index];
  }
  return id;
}

bool DiffTree::IsDescendantOrSelf(int node, int ancestor) const {
  for (int n = node; n >= 0; n = nodes_[n].parent) {
    if (n == ancestor) return true;
  }
  return false;
}

std::vector<int> DiffTree::PostOrder() const {
  std::vector<int> out;
  if (nodes_.empty()) return out;
  std::vector<std::pair<int, bool>> stack{{0, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      out.push_back(id);
      continue;
    }
    stack.emplace_back(id, true);
    const auto& c = nodes_[id].children;
    for (auto it = c.rbegin(); it != c.rend(); ++it) stack.emplace_back(*it, false);
  }
  return out;
}

std::string DiffTree::Serialize() const {
  if (nodes_.empty()) return "";
  WorkTree w = WorkTree::From(*this);
  std::string out;
  w.Serialize(0, &out);
  return out;
}

std::vector<std::string> DiffTree::LeafLabels() const {
  std::vector<std::string> out;
  for (int id = 0; id < size(); ++id) {
    if (nodes_[id].children.empty()) out.push_back(nodes_[id].label);
  }
  return out;
}

std::size_t Mapping::size() const {
  return static_cast<std::size_t>(
      std::count_if(src_to_dst.begin(), src_to_dst.end(), [](int d) { return d >= 0; }));
}

Mapping MatchTrees(const DiffTree& src, const DiffTree& dst, const DiffOptions& options) {
  return Matcher(src, dst, options).Run();
}

EditScript ComputeEditScript(const DiffTree& src, const DiffTree& dst,
                             const Mapping& mapping) {
  return ScriptGenerator(src, dst, mapping).Run();
}

std::string ApplyEditScript(const DiffTree& src, const EditScript& script) {
  WorkTree w = WorkTree::From(src);
  for (const auto& action : script.actions) w.Apply(action);
  std::string out;
  for (int c : w.nodes[w.root].children) w.Serialize(c, &out);
  return out;
}

std::vector<Correspondence> LocatePerturbed(
    const DiffTree& src, const DiffTree& dst, const Mapping& mapping,
    const std::vector<syntax::NodePath>& locations) {
  std::vector<Correspondence> out;
  for (const auto& path : locations) {
    int s = src.FindPath(path);
    if (s < 0) {
      throw std::invalid_argument("perturbed location not addressable: " +
                                  syntax::PathToString(path));
    }
    Correspondence c;
    int d = mapping.src_to_dst[s];
    if (d >= 0) {
      c.state = Correspondence::State::kMatched;
      c.variant_path = dst.node(d).path;
      c.identical = src.Text(s) == dst.Text(d);
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool ChangesOutside(const DiffTree& src, const DiffTree& dst, const Mapping& mapping,
                    const EditScript& script,
                    const std::vector<syntax::NodePath>& locations) {
  const int n = src.size();
  std::vector<int> location_ids;
  for (const auto& path : locations) {
    int id = src.FindPath(path);
    if (id < 0) {
      throw std::invalid_argument("perturbed location not addressable: " +
                                  syntax::PathToString(path));
    }
    location_ids.push_back(id);
  }
  auto inside = [&](int s) {
    return std::any_of(location_ids.begin(), location_ids.end(),
                       [&](int loc) { return src.IsDescendantOrSelf(s, loc); });
  };
  // An insert into the parent of a deleted location is allowed when the
  // inserted node lands between the partners of the location's matched
  // neighbours.
  auto in_deleted_slot = [&](int parent, int dst_node) {
    if (dst_node < 0 || dst.node(dst_node).parent < 0) return false;
    int dst_index = IndexInParent(dst.nodes(), dst_node);
    for (int loc : location_ids) {
      if (mapping.src_to_dst[loc] >= 0 || src.node(loc).parent != parent) continue;
      int dst_parent = mapping.src_to_dst[parent];
      if (dst_parent < 0 || dst.node(dst_node).parent != dst_parent) continue;
      const auto& siblings = src.node(parent).children;
      int at = IndexInParent(src.nodes(), loc);
      int low = -1, high = static_cast<int>(dst.node(dst_parent).children.size());
      for (int i = at - 1; i >= 0; --i) {
        int p = mapping.src_to_dst[siblings[i]];
        if (p >= 0 && dst.node(p).parent == dst_parent) {
          low = IndexInParent(dst.nodes(), p);
          break;
        }
      }
      for (int i = at + 1; i < static_cast<int>(siblings.size()); ++i) {
        int p = mapping.src_to_dst[siblings[i]];
        if (p >= 0 && dst.node(p).parent == dst_parent) {
          high = IndexInParent(dst.nodes(), p);
          break;
        }
      }
      if (low < dst_index && dst_index < high) return true;
    }
    return false;
  };

  std::map<int, bool> inserted_allowed;
  auto attach_allowed = [&](int parent, int dst_node) {
    if (parent < n) return inside(parent) || in_deleted_slot(parent, dst_node);
    auto it = inserted_allowed.find(parent);
    return it != inserted_allowed.end() && it->second;
  };
  for (const auto& action : script.actions) {
    switch (action.kind) {
      case EditAction::Kind::kUpdate:
      case EditAction::Kind::kDelete:
        if (action.node >= n || !inside(action.node)) return true;
        break;
      case EditAction::Kind::kInsert: {
        bool ok = attach_allowed(action.parent, action.dst_node);
        inserted_allowed[action.node] = ok;
        if (!ok) return true;
        break;
      }
      case EditAction::Kind::kMove:
        if (action.node < n) {
          if (!inside(action.node)) return true;
        } else if (!inserted_allowed[action.node]) {
          return true;
        }
        if (!attach_allowed(action.parent, action.dst_node)) return true;
        break;
    }
  }
  return false;
}

Diff DiffSources(const syntax::Tree& solution, const syntax::Tree& variant,
                 const DiffOptions& options) {
  Diff diff;
  diff.solution = DiffTree::FromSyntax(solution);
  diff.variant = DiffTree::FromSyntax(variant);
  diff.mapping = MatchTrees(diff.solution, diff.variant, options);
  diff.script = ComputeEditScript(diff.solution, diff.variant, diff.mapping);
  return diff;
}

nlohmann::json ToJson(const Diff& diff) {
  nlohmann::json pairs = nlohmann::json::array();
  nlohmann::json unmatched_solution = nlohmann::json::array();
  nlohmann::json unmatched_variant = nlohmann::json::array();
  for (int s = 0; s < diff.solution.size(); ++s) {
    int d = diff.mapping.src_to_dst[s];
    if (d >= 0) {
      pairs.push_back({syntax::PathToString(diff.solution.node(s).path),
                       syntax::PathToString(diff.variant.node(d).path)});
    } else {
      unmatched_solution.push_back(syntax::PathToString(diff.solution.node(s).path));
    }
  }
  for (int d = 0; d < diff.variant.size(); ++d) {
    if (diff.mapping.dst_to_src[d] < 0) {
      unmatched_variant.push_back(syntax::PathToString(diff.variant.node(d).path));
    }
  }
  static constexpr const char* kKindNames[] = {"insert", "delete", "update", "move"};
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : diff.script.actions) {
    actions.push_back({{"kind", kKindNames[static_cast<int>(a.kind)]},
                       {"node", a.node},
                       {"parent", a.parent},
                       {"position", a.position},
                       {"type", a.type},
                       {"label", a.label}});
  }
  return {{"pairs", std::move(pairs)},
          {"unmatched_solution", std::move(unmatched_solution)},
          {"unmatched_variant", std::move(unmatched_variant)},
          {"actions", std::move(actions)}};
}

}  // namespace ctxbug::differ
