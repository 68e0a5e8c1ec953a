#include "vc/parser.hpp"

#include <sstream>

namespace vc {
namespace {

struct Line {
  std::vector<std::string> toks;
  int number = 0;
};

struct Parser {
  std::vector<Line> lines;
  size_t pos = 0;
  std::vector<Diagnostic> diags;

  bool done() const { return pos >= lines.size(); }
  const Line& cur() const { return lines[pos]; }

  void error(const std::string& msg, int line) {
    diags.push_back({Severity::Error, msg, line, 1});
  }

  bool head_is(const std::string& kw) const {
    return !done() && cur().toks[0] == kw;
  }

  static bool parse_kind(const std::string& s, ScalarKind& k) {
    if (s == "f32") k = ScalarKind::F32;
    else if (s == "i32") k = ScalarKind::I32;
    else if (s == "u8") k = ScalarKind::U8;
    else return false;
    return true;
  }

  uint32_t literal(ScalarKind k, const std::string& text, int line) {
    bool ok = false;
    uint32_t bits = parse_literal_bits(k, text, ok);
    if (!ok) error("bad " + std::string(to_string(k)) + " literal '" + text + "'", line);
    return bits;
  }

  // Parses one instruction line; returns false if the line is not an
  // instruction (caller decides whether that is an error).
  bool parse_inst(Instruction& in) {
    const Line& ln = cur();
    const auto& t = ln.toks;
    in = Instruction{};
    in.line = ln.number;
    size_t n = t.size();

    // trailing guard: ... when <g>
    size_t end = n;
    if (n >= 2 && t[n - 2] == "when") {
      in.guard = t[n - 1];
      end = n - 2;
    }

    auto expect = [&](size_t want) {
      if (end != want) {
        error("malformed instruction", ln.number);
        return false;
      }
      return true;
    };

    if (t[0] == "store") {
      if (!expect(4)) return true;
      in.op = Opcode::Store;
      in.target = t[1];
      in.operands = {t[2], t[3]};
      pos++;
      return true;
    }
    if (t[0] == "pipewrite") {
      if (!expect(3)) return true;
      in.op = Opcode::PipeWrite;
      in.target = t[1];
      in.operands = {t[2]};
      pos++;
      return true;
    }
    if (end < 3 || t[1] != "=") return false;
    in.id = t[0];
    const std::string& op = t[2];
    if (op == "const") {
      if (!expect(5)) return true;
      in.op = Opcode::Const;
      if (!parse_kind(t[3], in.kind)) error("bad kind '" + t[3] + "'", ln.number);
      in.const_bits = literal(in.kind, t[4], ln.number);
    } else if (op == "add" || op == "sub" || op == "mul" || op == "cmpeq" ||
               op == "cmplt") {
      if (!expect(6)) return true;
      in.op = op == "add"     ? Opcode::Add
              : op == "sub"   ? Opcode::Sub
              : op == "mul"   ? Opcode::Mul
              : op == "cmpeq" ? Opcode::CmpEq
                              : Opcode::CmpLt;
      if (!parse_kind(t[3], in.kind)) error("bad kind '" + t[3] + "'", ln.number);
      in.operands = {t[4], t[5]};
    } else if (op == "mux") {
      if (!expect(6)) return true;
      in.op = Opcode::Mux;
      in.operands = {t[3], t[4], t[5]};
    } else if (op == "load") {
      if (!expect(5)) return true;
      in.op = Opcode::Load;
      in.target = t[3];
      in.operands = {t[4]};
    } else if (op == "piperead") {
      if (!expect(4)) return true;
      in.op = Opcode::PipeRead;
      in.target = t[3];
    } else if (op == "phi") {
      // id = phi <kind> [blk val] ...
      in.op = Opcode::Phi;
      if (end < 4 || !parse_kind(t[3], in.kind)) {
        error("bad block phi", ln.number);
        pos++;
        return true;
      }
      for (size_t i = 4; i + 1 < end; i += 2) {
        std::string blk = t[i];
        std::string val = t[i + 1];
        if (blk.front() == '[') blk.erase(0, 1);
        if (!val.empty() && val.back() == ']') val.pop_back();
        in.incomings.emplace_back(blk, val);
      }
    } else {
      return false;
    }
    pos++;
    return true;
  }

  bool parse_loop(LoopRegion& loop) {
    if (!head_is("loop")) {
      error("expected 'loop'", done() ? 0 : cur().number);
      return false;
    }
    loop.line = cur().number;
    const auto& t = cur().toks;
    if (t.size() >= 3 && t[1] == "trip") loop.trip_bound = std::stol(t[2]);
    pos++;

    if (head_is("pre")) {
      pos++;
      Instruction in;
      while (!done() && parse_inst(in)) loop.preheader.push_back(in);
    }
    while (head_is("phi")) {
      const auto& pt = cur().toks;
      if (pt.size() != 5) {
        error("malformed phi", cur().number);
        pos++;
        continue;
      }
      PhiNode ph;
      ph.line = cur().number;
      ph.id = pt[1];
      if (!parse_kind(pt[2], ph.kind)) error("bad kind '" + pt[2] + "'", cur().number);
      ph.init = pt[3];
      ph.next = pt[4];
      loop.phis.push_back(ph);
      pos++;
    }

    if (head_is("body")) {
      pos++;
      while (head_is("block")) {
        BasicBlock blk;
        blk.line = cur().number;
        blk.label = cur().toks.size() > 1 ? cur().toks[1] : "";
        pos++;
        Instruction in;
        while (!done() && parse_inst(in)) blk.insts.push_back(in);
        if (head_is("br")) {
          const auto& bt = cur().toks;
          if (bt.size() != 4) {
            error("malformed br", cur().number);
          } else {
            blk.term = TermKind::Br;
            blk.br_cond = bt[1];
            blk.succ_true = bt[2];
            blk.succ_false = bt[3];
          }
          pos++;
        } else if (head_is("jmp")) {
          blk.term = TermKind::Jmp;
          blk.succ_false = cur().toks.size() > 1 ? cur().toks[1] : "";
          pos++;
        } else if (head_is("end")) {
          blk.term = TermKind::End;
          pos++;
        } else {
          error("block '" + blk.label + "' missing terminator",
                done() ? 0 : cur().number);
        }
        loop.blocks.push_back(std::move(blk));
      }
    } else if (head_is("nest")) {
      pos++;
      while (!done() && !head_is("latch")) {
        BodyItem item;
        if (head_is("loop")) {
          item.loop = std::make_unique<LoopRegion>();
          if (!parse_loop(*item.loop)) return false;
        } else {
          Instruction in;
          if (!parse_inst(in)) {
            error("unexpected token '" + cur().toks[0] + "' in loop body",
                  cur().number);
            pos++;
            continue;
          }
          item.inst = std::make_unique<Instruction>(in);
        }
        loop.seq.push_back(std::move(item));
      }
    } else {
      error("expected 'body' or 'nest'", done() ? 0 : cur().number);
      return false;
    }

    if (head_is("latch")) {
      if (cur().toks.size() != 2)
        error("malformed latch", cur().number);
      else
        loop.latch_cond = cur().toks[1];
      pos++;
    } else {
      error("expected 'latch'", done() ? 0 : cur().number);
      return false;
    }
    while (head_is("out")) {
      const auto& ot = cur().toks;
      if (ot.size() != 3)
        error("malformed out", cur().number);
      else
        loop.exits.emplace_back(ot[1], ot[2]);
      pos++;
    }
    if (head_is("endloop")) {
      pos++;
    } else {
      error("expected 'endloop'", done() ? 0 : cur().number);
      return false;
    }
    return true;
  }
};

}  // namespace

ParseResult parse_program(const std::string& text) {
  ParseResult res;
  Parser p;
  {
    std::istringstream is(text);
    std::string raw;
    int n = 0;
    while (std::getline(is, raw)) {
      n++;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::istringstream ls(raw);
      Line line;
      line.number = n;
      std::string tok;
      while (ls >> tok) line.toks.push_back(tok);
      if (!line.toks.empty()) p.lines.push_back(std::move(line));
    }
  }

  if (p.done() || !p.head_is("program") || p.cur().toks.size() != 2) {
    p.error("expected 'program <name>'", p.done() ? 1 : p.cur().number);
    res.diags = p.diags;
    return res;
  }
  res.program.name = p.cur().toks[1];
  p.pos++;

  while (!p.done()) {
    if (p.head_is("space")) {
      const auto& t = p.cur().toks;
      MemorySpace s;
      s.line = p.cur().number;
      if (t.size() < 4 || !Parser::parse_kind(t[2], s.kind)) {
        p.error("malformed space declaration", s.line);
        p.pos++;
        continue;
      }
      s.name = t[1];
      s.length = std::stol(t[3]);
      if (t.size() > 4) {
        if (t[4] != "init") {
          p.error("expected 'init'", s.line);
        } else {
          for (size_t i = 5; i < t.size(); i++)
            s.initial_bits.push_back(p.literal(s.kind, t[i], s.line));
        }
      }
      res.program.spaces.push_back(std::move(s));
      p.pos++;
    } else if (p.head_is("pipe")) {
      const auto& t = p.cur().toks;
      StreamPort sp;
      sp.line = p.cur().number;
      if (t.size() < 4 || (t[1] != "in" && t[1] != "out") ||
          !Parser::parse_kind(t[3], sp.kind)) {
        p.error("malformed pipe declaration", sp.line);
        p.pos++;
        continue;
      }
      sp.dir = t[1] == "in" ? PortDir::In : PortDir::Out;
      sp.name = t[2];
      if (t.size() > 4) {
        if (t[4] != "data") {
          p.error("expected 'data'", sp.line);
        } else {
          for (size_t i = 5; i < t.size(); i++)
            sp.backing_bits.push_back(p.literal(sp.kind, t[i], sp.line));
        }
      }
      res.program.ports.push_back(std::move(sp));
      p.pos++;
    } else if (p.head_is("input")) {
      const auto& t = p.cur().toks;
      ScalarInput in;
      in.line = p.cur().number;
      if (t.size() != 3 || !Parser::parse_kind(t[2], in.kind)) {
        p.error("malformed input declaration", in.line);
      } else {
        in.name = t[1];
        res.program.inputs.push_back(in);
      }
      p.pos++;
    } else if (p.head_is("loop")) {
      break;
    } else {
      p.error("unexpected token '" + p.cur().toks[0] + "'", p.cur().number);
      p.pos++;
    }
  }

  if (!p.parse_loop(res.program.body)) {
    res.diags = p.diags;
    return res;
  }
  if (!p.done())
    p.error("trailing content after loop", p.cur().number);

  res.diags = p.diags;
  if (res.ok()) {
    auto vd = validate(res.program);
    res.diags.insert(res.diags.end(), vd.begin(), vd.end());
  }
  return res;
}

}  // namespace vc
