#include "vc/transforms.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace vc {
namespace {

// ---------------------------------------------------------------------------
// predication

struct Predicator {
  int counter = 0;
  std::vector<Instruction> synth_consts;  // appended to outermost preheader
  std::string zero_name;

  std::string fresh(const std::string& hint) {
    return "pp." + hint + "." + std::to_string(counter++);
  }

  std::string zero_const() {
    if (zero_name.empty()) {
      zero_name = "pp.zero";
      Instruction z;
      z.id = zero_name;
      z.op = Opcode::Const;
      z.kind = ScalarKind::I32;
      z.const_bits = 0;
      synth_consts.push_back(z);
    }
    return zero_name;
  }

  void flatten(LoopRegion& l) {
    if (l.blocks.size() <= 1) return;

    // topological order from the entry block
    std::unordered_map<std::string, const BasicBlock*> by_label;
    std::unordered_map<std::string, int> indegree;
    for (const auto& b : l.blocks) {
      by_label[b.label] = &b;
      indegree[b.label];
    }
    auto successors = [](const BasicBlock& b) {
      std::vector<std::string> s;
      if (b.term == TermKind::Br) {
        s.push_back(b.succ_true);
        s.push_back(b.succ_false);
      } else if (b.term == TermKind::Jmp) {
        s.push_back(b.succ_false);
      }
      return s;
    };
    for (const auto& b : l.blocks)
      for (const auto& s : successors(b)) indegree[s]++;

    std::vector<const BasicBlock*> order;
    std::vector<const BasicBlock*> ready{&l.blocks[0]};
    std::unordered_map<std::string, int> remaining = indegree;
    while (!ready.empty()) {
      const BasicBlock* b = ready.front();
      ready.erase(ready.begin());
      order.push_back(b);
      for (const auto& s : successors(*b))
        if (--remaining[s] == 0) ready.push_back(by_label.at(s));
    }
    if (order.size() != l.blocks.size())
      throw TransformError(
          "loop body is not an acyclic single-entry CFG; cannot predicate");

    int end_blocks = 0;
    for (const auto& b : l.blocks)
      if (b.term == TermKind::End) end_blocks++;
    if (end_blocks != 1)
      throw TransformError("loop body must have exactly one exit block");

    BasicBlock flat;
    flat.label = l.blocks[0].label;
    flat.term = TermKind::End;

    std::unordered_map<std::string, std::string> block_pred;  // "" == true
    std::map<std::pair<std::string, std::string>, std::string> edge_pred;
    std::unordered_map<std::string, std::vector<std::pair<std::string, std::string>>>
        incoming;  // block -> (pred block, edge pred value)
    block_pred[l.blocks[0].label] = "";

    auto emit = [&](Instruction in) -> std::string {
      flat.insts.push_back(in);
      return in.id;
    };
    auto and_preds = [&](const std::string& a, const std::string& b) {
      if (a.empty()) return b;
      if (b.empty()) return a;
      Instruction m;
      m.id = fresh("and");
      m.op = Opcode::Mul;
      m.kind = ScalarKind::I32;
      m.operands = {a, b};
      return emit(m);
    };

    for (const BasicBlock* b : order) {
      // compute this block's predicate from incoming edges (disjoint 0/1
      // indicators, so OR is integer addition)
      if (b != order.front()) {
        auto& inc = incoming[b->label];
        if (inc.empty())
          throw TransformError("unreachable block '" + b->label + "'");
        std::string acc = inc[0].second;
        for (size_t i = 1; i < inc.size(); i++) {
          Instruction add;
          add.id = fresh("or");
          add.op = Opcode::Add;
          add.kind = ScalarKind::I32;
          add.operands = {acc, inc[i].second};
          acc = emit(add);
        }
        block_pred[b->label] = acc;
      }
      const std::string& bp = block_pred[b->label];

      for (const auto& in : b->insts) {
        if (in.op == Opcode::Phi) {
          // mux chain over incoming edge predicates
          if (in.incomings.empty())
            throw TransformError("empty phi '" + in.id + "'");
          std::string cur = in.incomings.back().second;
          for (int i = static_cast<int>(in.incomings.size()) - 2; i >= 0; i--) {
            const auto& [from, val] = in.incomings[i];
            auto ep = edge_pred.find({from, b->label});
            if (ep == edge_pred.end())
              throw TransformError("phi incoming from non-predecessor '" +
                                   from + "'");
            Instruction mx;
            mx.id = i == 0 ? in.id : fresh("mux");
            mx.op = Opcode::Mux;
            mx.kind = in.kind;
            mx.operands = {ep->second, val, cur};
            cur = emit(mx);
          }
          if (in.incomings.size() == 1) {
            // degenerate: forward the single value through a mux on the
            // edge predicate to keep SSA naming intact
            Instruction mx;
            mx.id = in.id;
            mx.op = Opcode::Mux;
            mx.kind = in.kind;
            mx.operands = {edge_pred.at({in.incomings[0].first, b->label}),
                           in.incomings[0].second, in.incomings[0].second};
            emit(mx);
          }
          continue;
        }
        Instruction guarded = in;
        if (!bp.empty()) guarded.guard = and_preds(bp, in.guard);
        emit(guarded);
      }

      // edge predicates
      if (b->term == TermKind::Br) {
        std::string z = zero_const();
        Instruction notc;
        notc.id = fresh("not");
        notc.op = Opcode::CmpEq;
        notc.kind = ScalarKind::I32;
        notc.operands = {b->br_cond, z};
        emit(notc);
        Instruction isc;
        isc.id = fresh("is");
        isc.op = Opcode::CmpEq;
        isc.kind = ScalarKind::I32;
        isc.operands = {notc.id, z};
        emit(isc);
        std::string et = and_preds(bp, isc.id);
        std::string ef = and_preds(bp, notc.id);
        edge_pred[{b->label, b->succ_true}] = et;
        edge_pred[{b->label, b->succ_false}] = ef;
        incoming[b->succ_true].emplace_back(b->label, et);
        incoming[b->succ_false].emplace_back(b->label, ef);
      } else if (b->term == TermKind::Jmp) {
        edge_pred[{b->label, b->succ_false}] = bp;
        incoming[b->succ_false].emplace_back(b->label, bp);
      }
    }

    l.blocks.clear();
    l.blocks.push_back(std::move(flat));
  }

  void walk(LoopRegion& l) {
    if (l.is_innermost()) {
      flatten(l);
    } else {
      for (auto& item : l.seq)
        if (item.loop) walk(*item.loop);
    }
  }
};

// ---------------------------------------------------------------------------
// use counting / DCE helpers

void count_uses_inst(const Instruction& in,
                     std::unordered_map<std::string, int>& uses) {
  for (const auto& r : in.operands) uses[r]++;
  for (const auto& [blk, val] : in.incomings) uses[val]++;
  if (!in.guard.empty()) uses[in.guard]++;
}

void count_uses_loop(const LoopRegion& l,
                     std::unordered_map<std::string, int>& uses) {
  for (const auto& in : l.preheader) count_uses_inst(in, uses);
  for (const auto& ph : l.phis) {
    uses[ph.init]++;
    uses[ph.next]++;
  }
  for (const auto& b : l.blocks) {
    for (const auto& in : b.insts) count_uses_inst(in, uses);
    if (b.term == TermKind::Br) uses[b.br_cond]++;
  }
  for (const auto& item : l.seq) {
    if (item.inst) count_uses_inst(*item.inst, uses);
    if (item.loop) count_uses_loop(*item.loop, uses);
  }
  uses[l.latch_cond]++;
  for (const auto& [name, val] : l.exits) uses[val]++;
}

// Removes pure instructions with zero uses from one basic block,
// iterating until stable. Use counts are global over the program.
void dce_block(BasicBlock& blk, std::unordered_map<std::string, int>& uses) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = blk.insts.rbegin(); it != blk.insts.rend(); ++it) {
      const Instruction& in = *it;
      if (in.id.empty() || has_side_effect(in.op)) continue;
      if (uses[in.id] > 0) continue;
      Instruction dead = in;
      blk.insts.erase(std::next(it).base());
      for (const auto& r : dead.operands) uses[r]--;
      for (const auto& [b, v] : dead.incomings) uses[v]--;
      if (!dead.guard.empty()) uses[dead.guard]--;
      changed = true;
      break;
    }
  }
}

void collect_defs(const LoopRegion& l, std::unordered_set<std::string>& defs) {
  for (const auto& in : l.preheader)
    if (!in.id.empty()) defs.insert(in.id);
  for (const auto& ph : l.phis) defs.insert(ph.id);
  for (const auto& b : l.blocks)
    for (const auto& in : b.insts)
      if (!in.id.empty()) defs.insert(in.id);
  for (const auto& item : l.seq) {
    if (item.inst && !item.inst->id.empty()) defs.insert(item.inst->id);
    if (item.loop) collect_defs(*item.loop, defs);
  }
}

// ---------------------------------------------------------------------------
// unrolling

struct Unroller {
  int factor;
  bool reassociate;
  Program& prog;
  std::unordered_set<std::string> taken;  // every value id defined anywhere
  int wrap_counter = 0;
  int epoch = 0;  // disambiguates copy suffixes across repeated unrolls

  std::string copy_suffix(int j) const {
    std::string s = ".u" + std::to_string(j);
    if (epoch > 0) s += "_" + std::to_string(epoch);
    return s;
  }

  std::string epi_suffix() const {
    return epoch > 0 ? ".e_" + std::to_string(epoch) : ".e";
  }

  // unused id derived from `base`, registered as taken
  std::string fresh(const std::string& base) {
    std::string id = base;
    for (int n = 1; taken.count(id); n++)
      id = base + "_" + std::to_string(n);
    taken.insert(id);
    return id;
  }

  // value name as seen by unrolled copy `j`
  std::string resolve(const LoopRegion& l, const std::set<std::string>& body_defs,
                      const std::string& ref, int j) const {
    for (const auto& ph : l.phis) {
      if (ph.id == ref) {
        if (j == 0) return ref;
        return resolve(l, body_defs, ph.next, j - 1);
      }
    }
    if (body_defs.count(ref))
      return j == 0 ? ref : ref + copy_suffix(j);
    return ref;  // preheader / outer value
  }

  // Builds the unrolled main loop plus an optional epilogue. after_map
  // renames values used past the loop to whatever now carries them: the
  // epilogue copy if one exists, else the last main-body copy.
  void unroll_one(const LoopRegion& l, LoopRegion& main, LoopRegion& epilogue,
                  bool& has_epilogue,
                  std::unordered_map<std::string, std::string>& after_map) {
    if (!l.single_block())
      throw TransformError("unroll requires a single-basic-block loop body "
                           "(apply predication first)");
    if (!l.trip_bound)
      throw TransformError("unroll requires a static trip bound");
    long trip = *l.trip_bound;
    if (trip < factor)
      throw TransformError("unroll factor exceeds trip count");
    long remainder = trip % factor;
    has_epilogue = remainder != 0;

    const BasicBlock& body = l.blocks[0];
    std::set<std::string> body_defs;
    for (const auto& in : body.insts)
      if (!in.id.empty()) body_defs.insert(in.id);

    // pick a suffix epoch whose renames collide with nothing already defined
    auto clashes = [&]() {
      for (const auto& d : body_defs) {
        for (int j = 1; j < factor; j++)
          if (taken.count(d + copy_suffix(j))) return true;
        if (has_epilogue && taken.count(d + epi_suffix())) return true;
      }
      if (has_epilogue)
        for (const auto& ph : l.phis)
          if (taken.count(ph.id + epi_suffix())) return true;
      return false;
    };
    while (clashes()) epoch++;
    for (const auto& d : body_defs) {
      for (int j = 1; j < factor; j++) taken.insert(d + copy_suffix(j));
      if (has_epilogue) taken.insert(d + epi_suffix());
    }
    if (has_epilogue)
      for (const auto& ph : l.phis) taken.insert(ph.id + epi_suffix());

    main = l;
    main.trip_bound = trip / factor;
    BasicBlock& mb = main.blocks[0];
    for (int j = 1; j < factor; j++) {
      for (const auto& in : body.insts) {
        Instruction copy = in;
        if (!copy.id.empty()) copy.id += copy_suffix(j);
        for (auto& r : copy.operands) r = resolve(l, body_defs, r, j);
        if (!copy.guard.empty()) copy.guard = resolve(l, body_defs, copy.guard, j);
        mb.insts.push_back(std::move(copy));
      }
    }
    strengthen_inductions(l, main);
    for (auto& ph : main.phis)
      ph.next = resolve(l, body_defs, ph.next, factor - 1);
    main.latch_cond = resolve(l, body_defs, l.latch_cond, factor - 1);

    if (reassociate) reassociate_phis(l, body_defs, main);

    if (!has_epilogue) {
      for (const auto& d : body_defs) {
        std::string r = resolve(l, body_defs, d, factor - 1);
        if (r != d) after_map[d] = r;
      }
      for (size_t pi = 0; pi < l.phis.size(); pi++)
        after_map[l.phis[pi].next] = main.phis[pi].next;
      return;
    }

    // The resolved original latch condition tests the wrong counter once a
    // remainder is split off, so drive the main loop with its own counter.
    {
      Instruction zero, one, lim;
      zero.id = fresh("uw.zero");
      zero.op = Opcode::Const;
      zero.kind = ScalarKind::I32;
      zero.const_bits = 0;
      one.id = fresh("uw.one");
      one.op = Opcode::Const;
      one.kind = ScalarKind::I32;
      one.const_bits = 1;
      lim.id = fresh("uw.lim");
      lim.op = Opcode::Const;
      lim.kind = ScalarKind::I32;
      lim.const_bits = static_cast<uint32_t>(*main.trip_bound);
      PhiNode ctr;
      ctr.id = fresh("uw.i");
      ctr.kind = ScalarKind::I32;
      ctr.init = zero.id;
      Instruction incr;
      incr.id = fresh("uw.i.next");
      incr.op = Opcode::Add;
      incr.kind = ScalarKind::I32;
      incr.operands = {ctr.id, one.id};
      Instruction cmp;
      cmp.id = fresh("uw.cont");
      cmp.op = Opcode::CmpLt;
      cmp.kind = ScalarKind::I32;
      cmp.operands = {incr.id, lim.id};
      ctr.next = incr.id;
      main.preheader.push_back(zero);
      main.preheader.push_back(one);
      main.preheader.push_back(lim);
      mb.insts.push_back(incr);
      mb.insts.push_back(cmp);
      main.latch_cond = cmp.id;
      main.phis.push_back(ctr);
    }

    epilogue = l;
    epilogue.preheader.clear();
    epilogue.trip_bound = remainder;
    for (size_t pi = 0; pi < l.phis.size(); pi++) {
      PhiNode& ph = epilogue.phis[pi];
      after_map[ph.id] = ph.id + epi_suffix();
      ph.init = main.phis[pi].next;  // value after the main loop
      ph.id += epi_suffix();
    }
    for (const auto& d : body_defs) after_map[d] = d + epi_suffix();
    auto remap = [&](std::string& r) {
      auto it = after_map.find(r);
      if (it != after_map.end()) r = it->second;
    };
    for (auto& ph : epilogue.phis) remap(ph.next);
    for (auto& in : epilogue.blocks[0].insts) {
      if (!in.id.empty()) remap(in.id);
      for (auto& r : in.operands) remap(r);
      if (!in.guard.empty()) remap(in.guard);
    }
    remap(epilogue.latch_cond);
    epilogue.exits.clear();
    main.exits.clear();
  }

  // Copy j of an integer induction update is a chain of j dependent adds;
  // rewrite each copy as one add of the phi and a scaled step constant so
  // address and latch computations stay shallow. Integer addition is
  // exact, so the values are unchanged.
  void strengthen_inductions(const LoopRegion& l, LoopRegion& main) {
    BasicBlock& mb = main.blocks[0];
    for (const auto& ph : l.phis) {
      if (ph.kind != ScalarKind::I32) continue;
      const Instruction* upd = nullptr;
      for (const auto& in : l.blocks[0].insts)
        if (in.id == ph.next) { upd = &in; break; }
      if (!upd || upd->op != Opcode::Add || upd->kind != ScalarKind::I32 ||
          upd->operands.size() != 2 || !upd->guard.empty())
        continue;
      std::string other;
      if (upd->operands[0] == ph.id) other = upd->operands[1];
      else if (upd->operands[1] == ph.id) other = upd->operands[0];
      else continue;
      const Instruction* step = nullptr;
      for (const auto& in : main.preheader)
        if (in.id == other) {
          if (in.op == Opcode::Const) step = &in;
          break;
        }
      if (!step) continue;
      for (int j = 1; j < factor; j++) {
        std::string cid = ph.next + copy_suffix(j);
        for (auto& in : mb.insts) {
          if (in.id != cid) continue;
          Instruction c;
          c.id = fresh(ph.id + ".step" + std::to_string(j + 1));
          c.op = Opcode::Const;
          c.kind = ScalarKind::I32;
          c.const_bits = static_cast<uint32_t>(
              static_cast<int32_t>(step->const_bits) * (j + 1));
          in.operands = {ph.id, c.id};
          main.preheader.push_back(std::move(c));
          break;
        }
      }
    }
  }

  void reassociate_phis(const LoopRegion& orig,
                        const std::set<std::string>& body_defs,
                        LoopRegion& main) {
    BasicBlock& mb = main.blocks[0];
    int seq = 0;
    for (size_t pi = 0; pi < orig.phis.size(); pi++) {
      const PhiNode& ph = orig.phis[pi];
      if (ph.kind != ScalarKind::F32) continue;
      const Instruction* upd = nullptr;
      for (const auto& in : orig.blocks[0].insts)
        if (in.id == ph.next) upd = &in;
      if (!upd || upd->op != Opcode::Add || upd->kind != ScalarKind::F32)
        continue;
      // accumulation pattern: next = add(phi, term)
      bool acc_first = upd->operands[0] == ph.id;
      bool acc_second = upd->operands[1] == ph.id;
      if (!acc_first && !acc_second) continue;
      if (!upd->guard.empty()) continue;
      std::string term = upd->operands[acc_first ? 1 : 0];

      // gather per-copy terms
      std::vector<std::string> terms;
      for (int j = 0; j < factor; j++)
        terms.push_back(resolve(orig, body_defs, term, j));
      // balanced pairwise tree
      while (terms.size() > 1) {
        std::vector<std::string> next;
        for (size_t i = 0; i + 1 < terms.size(); i += 2) {
          Instruction add;
          add.id = fresh("ra." + ph.id + "." + std::to_string(seq++));
          add.op = Opcode::Add;
          add.kind = ScalarKind::F32;
          add.operands = {terms[i], terms[i + 1]};
          mb.insts.push_back(add);
          next.push_back(add.id);
        }
        if (terms.size() % 2) next.push_back(terms.back());
        terms = std::move(next);
      }
      Instruction acc;
      acc.id = fresh("ra." + ph.id + ".sum");
      acc.op = Opcode::Add;
      acc.kind = ScalarKind::F32;
      acc.operands = {ph.id, terms[0]};
      mb.insts.push_back(acc);
      main.phis[pi].next = acc.id;
    }
  }

  void remap_outside(LoopRegion& l, const LoopRegion* skip_a,
                     const LoopRegion* skip_b,
                     const std::unordered_map<std::string, std::string>& m) {
    auto remap = [&](std::string& r) {
      auto it = m.find(r);
      if (it != m.end()) r = it->second;
    };
    auto remap_inst = [&](Instruction& in) {
      for (auto& r : in.operands) remap(r);
      for (auto& [b, v] : in.incomings) remap(v);
      if (!in.guard.empty()) remap(in.guard);
    };
    if (&l != skip_a && &l != skip_b) {
      for (auto& in : l.preheader) remap_inst(in);
      for (auto& ph : l.phis) {
        remap(ph.init);
        remap(ph.next);
      }
      for (auto& b : l.blocks) {
        for (auto& in : b.insts) remap_inst(in);
        if (b.term == TermKind::Br) remap(b.br_cond);
      }
      for (auto& item : l.seq) {
        if (item.inst) remap_inst(*item.inst);
        if (item.loop) remap_outside(*item.loop, skip_a, skip_b, m);
      }
      remap(l.latch_cond);
      for (auto& [name, val] : l.exits) remap(val);
    }
  }

  // Recursively replaces innermost loops with their unrolled forms.
  void walk(LoopRegion& l, bool is_program_body) {
    if (l.is_innermost()) {
      LoopRegion main, epilogue;
      bool has_epi = false;
      std::unordered_map<std::string, std::string> after_map;
      LoopRegion original = l;
      unroll_one(original, main, epilogue, has_epi, after_map);
      if (!has_epi) {
        l = std::move(main);
        l.exits = original.exits;
        for (auto& [name, val] : l.exits) {
          auto it = after_map.find(val);
          if (it != after_map.end()) val = it->second;
        }
        return;
      }
      if (is_program_body) {
        // wrap main + epilogue in a trip-1 shell so the program body stays
        // a single region
        LoopRegion shell;
        shell.trip_bound = 1;
        shell.preheader = std::move(main.preheader);
        Instruction f;
        f.id = fresh("uw.false." + std::to_string(wrap_counter++));
        f.op = Opcode::Const;
        f.kind = ScalarKind::I32;
        f.const_bits = 0;
        shell.preheader.push_back(f);
        shell.latch_cond = f.id;
        main.preheader.clear();
        shell.seq.emplace_back();
        shell.seq.back().loop = std::make_unique<LoopRegion>(std::move(main));
        shell.seq.emplace_back();
        shell.seq.back().loop = std::make_unique<LoopRegion>(std::move(epilogue));
        shell.exits = original.exits;
        for (auto& [name, val] : shell.exits) {
          auto it = after_map.find(val);
          if (it != after_map.end()) val = it->second;
        }
        l = std::move(shell);
      } else {
        // handled by parent (needs seq splicing)
        throw TransformError("internal: nested epilogue splice");
      }
      return;
    }
    for (size_t idx = 0; idx < l.seq.size(); idx++) {
      auto& item = l.seq[idx];
      if (!item.loop) continue;
      if (!item.loop->is_innermost()) {
        walk(*item.loop, false);
        continue;
      }
      LoopRegion main, epilogue;
      bool has_epi = false;
      std::unordered_map<std::string, std::string> after_map;
      LoopRegion original = *item.loop;
      unroll_one(original, main, epilogue, has_epi, after_map);
      if (!has_epi) {
        main.exits = original.exits;
        for (auto& [name, val] : main.exits) {
          auto it = after_map.find(val);
          if (it != after_map.end()) val = it->second;
        }
        *item.loop = std::move(main);
        remap_outside(prog.body, item.loop.get(), nullptr, after_map);
        continue;
      }
      *item.loop = std::move(main);
      BodyItem epi;
      epi.loop = std::make_unique<LoopRegion>(std::move(epilogue));
      LoopRegion* skip_a = item.loop.get();
      LoopRegion* skip_b = epi.loop.get();
      l.seq.insert(l.seq.begin() + idx + 1, std::move(epi));
      remap_outside(prog.body, skip_a, skip_b, after_map);
      idx++;
    }
  }
};

}  // namespace

Program predicate(const Program& p) {
  Program out = p;
  Predicator pr;
  pr.walk(out.body);
  for (const auto& c : pr.synth_consts) out.body.preheader.push_back(c);
  // consts must be defined before use; preheader order is irrelevant to
  // SSA resolution but keep them at the front for readability
  std::rotate(out.body.preheader.begin(),
              out.body.preheader.end() - static_cast<long>(pr.synth_consts.size()),
              out.body.preheader.end());
  auto diags = validate(out);
  for (const auto& d : diags)
    if (d.severity == Severity::Error)
      throw TransformError("predication produced invalid program: " + d.message);
  return out;
}

Program unroll(const Program& p, int factor, bool reassociate) {
  if (factor < 1) throw TransformError("unroll factor must be positive");
  Program out = p;
  if (factor == 1) return out;
  Unroller u{factor, reassociate, out, {}};
  collect_defs(out.body, u.taken);
  u.walk(out.body, true);
  // sweep dead copies (duplicated latch compares, superseded chains)
  std::unordered_map<std::string, int> uses;
  count_uses_loop(out.body, uses);
  std::function<void(LoopRegion&)> sweep = [&](LoopRegion& l) {
    for (auto& b : l.blocks) dce_block(b, uses);
    for (auto& item : l.seq)
      if (item.loop) sweep(*item.loop);
  };
  sweep(out.body);
  auto diags = validate(out);
  for (const auto& d : diags)
    if (d.severity == Severity::Error)
      throw TransformError("unroll produced invalid program: " + d.message);
  return out;
}

}  // namespace vc
