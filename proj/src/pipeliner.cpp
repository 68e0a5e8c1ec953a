#include "vc/pipeliner.hpp"

#include <algorithm>

namespace vc {

namespace {

struct Pipeliner {
  VirtualCircuit& vc;
  int M;

  int add_place(const std::string& name, int initial, bool marked, int rid) {
    Place p;
    p.id = static_cast<int>(vc.cn.places.size());
    p.name = name;
    p.capacity = M;
    p.initial = initial;
    p.marked_arc = marked;
    p.term_internal = !marked;
    vc.cn.places.push_back(std::move(p));
    vc.regions[rid].region_places.push_back(
        static_cast<int>(vc.cn.places.size()) - 1);
    return static_cast<int>(vc.cn.places.size()) - 1;
  }

  int final_of(int node) const {
    return vc.dp.nodes[node].protocol == Protocol::MuxProtocol
               ? vc.node_trans[node][2]
               : vc.node_trans[node][3];
  }

  void marked_arc(int rule, int from_t, int to_t, int rid,
                  const std::string& name) {
    int p = add_place(name, 1, true, rid);
    vc.cn.transitions[from_t].out.push_back(p);
    vc.cn.transitions[to_t].in.push_back(p);
    vc.cn.marked_arc_places.push_back(p);
    vc.rule_arcs.push_back({rule, from_t, to_t, p});
  }

  static void erase_one(std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) v.erase(it);
  }

  void rewrite_region(RegionInfo& r) {
    std::string L = "L" + std::to_string(r.id);
    int credit = add_place(L + ".credit", M, false, r.id);

    Transition& enter = vc.cn.transitions[r.enter_trans];
    Transition& take = vc.cn.transitions[r.back_trans];
    Transition& join = vc.cn.transitions[r.body_join_trans];
    Transition& exit_t = vc.cn.transitions[r.exit_trans];

    enter.in.push_back(credit);
    erase_one(take.in, r.body_done_place);
    take.in.push_back(credit);
    erase_one(join.out, r.body_done_place);
    join.out.push_back(credit);
    erase_one(exit_t.in, r.body_done_place);
    for (int i = 0; i < M; i++) {
      exit_t.in.push_back(credit);
      exit_t.out.push_back(credit);
    }

    LoopTerminator term;
    term.region = r.id;
    term.depth = M;
    term.enter_trans = r.enter_trans;
    term.take_trans = r.back_trans;
    term.exit_trans = r.exit_trans;
    term.body_join_trans = r.body_join_trans;
    term.credit_place = credit;

    // back-edge multiplexor sequencing: the next request may only go out
    // once the new value is ready, every reader of the old value has
    // sampled it, and the previous selection was acknowledged
    for (const auto& pc : r.phis) {
      const std::string& nm = vc.dp.nodes[pc.node].name;
      auto unmarked = [&](int from_t, const std::string& tag) {
        int p = add_place("pl." + nm + "." + tag, 0, false, r.id);
        vc.cn.transitions[from_t].out.push_back(p);
        vc.cn.transitions[pc.req_back_trans].in.push_back(p);
        vc.cn.transitions[r.exit_trans].in.push_back(p);
        term.flush_places.push_back(p);
      };
      if (pc.next_producer >= 0)
        unmarked(final_of(pc.next_producer), "val");
      for (size_t i = 0; i < pc.reader_nodes.size(); i++)
        unmarked(vc.node_trans[pc.reader_nodes[i]][1],
                 "rd" + std::to_string(i));
      unmarked(pc.ack_trans, "ack");
    }

    // rules (1)-(5): one marked arc each, single initial token
    for (int a : r.body_nodes) {
      const auto& nm = vc.dp.nodes[a].name;
      marked_arc(1, vc.node_trans[a][1], vc.node_trans[a][0], r.id,
                 "r1." + nm);
      marked_arc(2, vc.node_trans[a][3], vc.node_trans[a][2], r.id,
                 "r2." + nm);
    }
    for (const auto& [a, b] : r.raw_edges) {
      if (vc.dp.nodes[a].protocol != Protocol::SplitFourPhase) continue;
      marked_arc(3, vc.node_trans[b][1], vc.node_trans[a][2], r.id,
                 "r3." + vc.dp.nodes[a].name + ">" + vc.dp.nodes[b].name);
    }
    for (const auto& [rd, wr] : r.war_edges)
      marked_arc(4, vc.node_trans[wr][3], vc.node_trans[rd][0], r.id,
                 "r4." + vc.dp.nodes[rd].name + ">" + vc.dp.nodes[wr].name);
    for (const auto& [p, q] : r.mem_order)
      marked_arc(5, vc.node_trans[q][1], vc.node_trans[p][0], r.id,
                 "r5." + vc.dp.nodes[p].name + ">" + vc.dp.nodes[q].name);
    for (const auto& [p, q] : r.mem_relaxed) {
      // pairs with no in-body arc: impose both directions across
      // iterations so ordering matches what the in-body arc plus the
      // successive-pair rule would transitively give
      marked_arc(5, vc.node_trans[q][1], vc.node_trans[p][0], r.id,
                 "r5." + vc.dp.nodes[p].name + ">" + vc.dp.nodes[q].name);
      // the forward arc runs early-to-late inside one iteration, so its
      // place briefly holds two tokens; at depth 1 the single loop credit
      // already serializes iterations and the arc would only jam
      if (M >= 2)
        marked_arc(5, vc.node_trans[p][1], vc.node_trans[q][0], r.id,
                   "r5f." + vc.dp.nodes[p].name + ">" + vc.dp.nodes[q].name);
    }

    vc.terminators.push_back(std::move(term));
    r.pipelined = true;
  }
};

}  // namespace

VirtualCircuit pipeline_loop(const VirtualCircuit& in, int M) {
  if (M < 1) throw CircuitError("pipeline depth must be positive");
  if (in.pipelined)
    throw CircuitError("circuit is already pipelined; refusing to stack");
  VirtualCircuit vc = in;
  Pipeliner p{vc, M};
  for (auto& r : vc.regions)
    if (r.innermost) p.rewrite_region(r);
  for (auto& pl : vc.cn.places) pl.capacity = M;
  vc.pipelined = true;
  vc.depth = M;
  return vc;
}

}  // namespace vc
