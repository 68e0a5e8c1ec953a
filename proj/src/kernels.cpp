#include "vc/kernels.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace vc {
namespace {

Instruction bin(const std::string& id, Opcode op, ScalarKind k,
                const std::string& a, const std::string& b) {
  Instruction in;
  in.id = id;
  in.op = op;
  in.kind = k;
  in.operands = {a, b};
  return in;
}

Instruction cst(const std::string& id, ScalarKind k, uint32_t bits) {
  Instruction in;
  in.id = id;
  in.op = Opcode::Const;
  in.kind = k;
  in.const_bits = bits;
  return in;
}

Instruction cst_i32(const std::string& id, int32_t v) {
  return cst(id, ScalarKind::I32, static_cast<uint32_t>(v));
}

Instruction cst_f32(const std::string& id, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  return cst(id, ScalarKind::F32, bits);
}

Instruction load(const std::string& id, const std::string& space,
                 const std::string& addr, ScalarKind k) {
  Instruction in;
  in.id = id;
  in.op = Opcode::Load;
  in.kind = k;
  in.target = space;
  in.operands = {addr};
  return in;
}

Instruction store(const std::string& space, const std::string& addr,
                  const std::string& val, ScalarKind k) {
  Instruction in;
  in.op = Opcode::Store;
  in.kind = k;
  in.target = space;
  in.operands = {addr, val};
  return in;
}

PhiNode phi(const std::string& id, ScalarKind k, const std::string& init,
            const std::string& next) {
  PhiNode ph;
  ph.id = id;
  ph.kind = k;
  ph.init = init;
  ph.next = next;
  return ph;
}

uint32_t f32_bits(float v) {
  uint32_t b;
  std::memcpy(&b, &v, 4);
  return b;
}

}  // namespace

Program gen_dotp(long n) {
  if (n < 1) throw std::invalid_argument("gen_dotp: n must be >= 1");
  Program p;
  p.name = "dotp";
  p.spaces.push_back({"a", ScalarKind::F32, n, {}, 0});
  p.spaces.push_back({"b", ScalarKind::F32, n, {}, 0});

  LoopRegion& l = p.body;
  l.trip_bound = n;
  l.preheader.push_back(cst_i32("c0", 0));
  l.preheader.push_back(cst_i32("c1", 1));
  l.preheader.push_back(cst_i32("cN", static_cast<int32_t>(n)));
  l.preheader.push_back(cst_f32("fz", 0.0f));
  l.phis.push_back(phi("I", ScalarKind::I32, "c0", "I.next"));
  l.phis.push_back(phi("acc", ScalarKind::F32, "fz", "acc.next"));

  BasicBlock blk;
  blk.label = "b0";
  blk.insts.push_back(load("av", "a", "I", ScalarKind::F32));
  blk.insts.push_back(load("bv", "b", "I", ScalarKind::F32));
  blk.insts.push_back(bin("prod", Opcode::Mul, ScalarKind::F32, "av", "bv"));
  blk.insts.push_back(
      bin("acc.next", Opcode::Add, ScalarKind::F32, "acc", "prod"));
  blk.insts.push_back(bin("I.next", Opcode::Add, ScalarKind::I32, "I", "c1"));
  blk.insts.push_back(
      bin("cond", Opcode::CmpLt, ScalarKind::I32, "I.next", "cN"));
  blk.term = TermKind::End;
  l.blocks.push_back(std::move(blk));
  l.latch_cond = "cond";
  l.exits.emplace_back("dotP", "acc.next");
  return p;
}

Program gen_fft_stage(long n) {
  if (n < 4 || (n & (n - 1)) != 0)
    throw std::invalid_argument("gen_fft_stage: n must be a power of two >= 4");
  long half = n / 2;
  Program p;
  p.name = "fft_stage";
  p.spaces.push_back({"x", ScalarKind::F32, 2 * n, {}, 0});

  MemorySpace wr{"wr", ScalarKind::F32, half, {}, 0};
  MemorySpace wi{"wi", ScalarKind::F32, half, {}, 0};
  for (long b = 0; b < half; b++) {
    double ang = -2.0 * M_PI * static_cast<double>(b) / static_cast<double>(n);
    wr.initial_bits.push_back(f32_bits(static_cast<float>(std::cos(ang))));
    wi.initial_bits.push_back(f32_bits(static_cast<float>(std::sin(ang))));
  }
  p.spaces.push_back(std::move(wr));
  p.spaces.push_back(std::move(wi));

  LoopRegion& l = p.body;
  l.trip_bound = half;
  l.preheader.push_back(cst_i32("c0", 0));
  l.preheader.push_back(cst_i32("c1", 1));
  l.preheader.push_back(cst_i32("cHalf", static_cast<int32_t>(half)));
  l.preheader.push_back(cst_i32("cN", static_cast<int32_t>(n)));
  l.phis.push_back(phi("B", ScalarKind::I32, "c0", "B.next"));

  BasicBlock blk;
  blk.label = "b0";
  auto& bi = blk.insts;
  bi.push_back(bin("B2", Opcode::Add, ScalarKind::I32, "B", "cHalf"));
  bi.push_back(bin("NB", Opcode::Add, ScalarKind::I32, "B", "cN"));
  bi.push_back(bin("NB2", Opcode::Add, ScalarKind::I32, "B2", "cN"));
  bi.push_back(load("ur", "x", "B", ScalarKind::F32));
  bi.push_back(load("vr", "x", "B2", ScalarKind::F32));
  bi.push_back(load("ui", "x", "NB", ScalarKind::F32));
  bi.push_back(load("vi", "x", "NB2", ScalarKind::F32));
  bi.push_back(load("twr", "wr", "B", ScalarKind::F32));
  bi.push_back(load("twi", "wi", "B", ScalarKind::F32));
  bi.push_back(bin("sumr", Opcode::Add, ScalarKind::F32, "ur", "vr"));
  bi.push_back(bin("sumi", Opcode::Add, ScalarKind::F32, "ui", "vi"));
  bi.push_back(bin("difr", Opcode::Sub, ScalarKind::F32, "ur", "vr"));
  bi.push_back(bin("difi", Opcode::Sub, ScalarKind::F32, "ui", "vi"));
  bi.push_back(bin("m1", Opcode::Mul, ScalarKind::F32, "difr", "twr"));
  bi.push_back(bin("m2", Opcode::Mul, ScalarKind::F32, "difi", "twi"));
  bi.push_back(bin("m3", Opcode::Mul, ScalarKind::F32, "difr", "twi"));
  bi.push_back(bin("m4", Opcode::Mul, ScalarKind::F32, "difi", "twr"));
  bi.push_back(bin("tr", Opcode::Sub, ScalarKind::F32, "m1", "m2"));
  bi.push_back(bin("ti", Opcode::Add, ScalarKind::F32, "m3", "m4"));
  // dedicated write-port address generators; sharing the read addresses
  // would chain the index update to the slowest store
  bi.push_back(bin("sB", Opcode::Add, ScalarKind::I32, "B", "c0"));
  bi.push_back(bin("sNB", Opcode::Add, ScalarKind::I32, "sB", "cN"));
  bi.push_back(bin("sB2", Opcode::Add, ScalarKind::I32, "B", "cHalf"));
  bi.push_back(bin("sNB2", Opcode::Add, ScalarKind::I32, "sB2", "cN"));
  bi.push_back(store("x", "sB", "sumr", ScalarKind::F32));
  bi.push_back(store("x", "sNB", "sumi", ScalarKind::F32));
  bi.push_back(store("x", "sB2", "tr", ScalarKind::F32));
  bi.push_back(store("x", "sNB2", "ti", ScalarKind::F32));
  bi.push_back(bin("B.next", Opcode::Add, ScalarKind::I32, "B", "c1"));
  bi.push_back(bin("bc", Opcode::CmpLt, ScalarKind::I32, "B.next", "cHalf"));
  blk.term = TermKind::End;
  l.blocks.push_back(std::move(blk));
  l.latch_cond = "bc";
  return p;
}

namespace {

LoopRegion matmul_inner_plain(long n) {
  LoopRegion k;
  k.trip_bound = n;
  k.phis.push_back(phi("k", ScalarKind::I32, "c0", "k.next"));
  k.phis.push_back(phi("v", ScalarKind::F32, "fz", "v.next"));
  BasicBlock blk;
  blk.label = "b0";
  auto& bi = blk.insts;
  bi.push_back(bin("a.row", Opcode::Mul, ScalarKind::I32, "i", "cN"));
  bi.push_back(bin("a.addr", Opcode::Add, ScalarKind::I32, "a.row", "k"));
  bi.push_back(load("av", "a", "a.addr", ScalarKind::F32));
  bi.push_back(bin("b.row", Opcode::Mul, ScalarKind::I32, "k", "cN"));
  bi.push_back(bin("b.addr", Opcode::Add, ScalarKind::I32, "b.row", "j"));
  bi.push_back(load("bv", "b", "b.addr", ScalarKind::F32));
  bi.push_back(bin("prod", Opcode::Mul, ScalarKind::F32, "av", "bv"));
  bi.push_back(bin("v.next", Opcode::Add, ScalarKind::F32, "v", "prod"));
  bi.push_back(bin("k.next", Opcode::Add, ScalarKind::I32, "k", "c1"));
  bi.push_back(bin("kc", Opcode::CmpLt, ScalarKind::I32, "k.next", "cN"));
  blk.term = TermKind::End;
  k.blocks.push_back(std::move(blk));
  k.latch_cond = "kc";
  return k;
}

LoopRegion matmul_inner_tile(long n) {
  auto name = [](const std::string& base, int r, int c) {
    return base + std::to_string(r) + std::to_string(c);
  };
  LoopRegion kl;
  kl.trip_bound = n / 4;
  kl.phis.push_back(phi("k", ScalarKind::I32, "c0", "k.next"));
  for (int r = 0; r < 4; r++)
    for (int c = 0; c < 4; c++)
      kl.phis.push_back(
          phi(name("v", r, c), ScalarKind::F32, "fz", name("v", r, c) + ".n"));

  BasicBlock blk;
  blk.label = "b0";
  auto& bi = blk.insts;
  auto ivar = [&](int r) { return r == 0 ? std::string("i") : "i" + std::to_string(r); };
  auto jvar = [&](int c) { return c == 0 ? std::string("j") : "j" + std::to_string(c); };
  auto kvar = [&](int q) { return q == 0 ? std::string("k") : "k" + std::to_string(q); };
  for (int q = 1; q < 4; q++)
    bi.push_back(bin(kvar(q), Opcode::Add, ScalarKind::I32, "k",
                     "c" + std::to_string(q)));
  // a[i+r][k+q]
  for (int r = 0; r < 4; r++) {
    bi.push_back(
        bin("arow" + std::to_string(r), Opcode::Mul, ScalarKind::I32, ivar(r), "cN"));
    for (int q = 0; q < 4; q++) {
      std::string addr = "aad" + std::to_string(r) + std::to_string(q);
      bi.push_back(bin(addr, Opcode::Add, ScalarKind::I32,
                       "arow" + std::to_string(r), kvar(q)));
      bi.push_back(load(name("a", r, q), "a", addr, ScalarKind::F32));
    }
  }
  // b[k+q][j+c]
  for (int q = 0; q < 4; q++) {
    bi.push_back(
        bin("brow" + std::to_string(q), Opcode::Mul, ScalarKind::I32, kvar(q), "cN"));
    for (int c = 0; c < 4; c++) {
      std::string addr = "bad" + std::to_string(q) + std::to_string(c);
      bi.push_back(bin(addr, Opcode::Add, ScalarKind::I32,
                       "brow" + std::to_string(q), jvar(c)));
      bi.push_back(load(name("b", q, c), "b", addr, ScalarKind::F32));
    }
  }
  // v_rc += ((a_r0*b_0c + a_r1*b_1c) + (a_r2*b_2c + a_r3*b_3c))
  for (int r = 0; r < 4; r++) {
    for (int c = 0; c < 4; c++) {
      std::string rc = std::to_string(r) + std::to_string(c);
      for (int q = 0; q < 4; q++)
        bi.push_back(bin("p" + rc + std::to_string(q), Opcode::Mul,
                         ScalarKind::F32, name("a", r, q), name("b", q, c)));
      bi.push_back(bin("s" + rc + "a", Opcode::Add, ScalarKind::F32,
                       "p" + rc + "0", "p" + rc + "1"));
      bi.push_back(bin("s" + rc + "b", Opcode::Add, ScalarKind::F32,
                       "p" + rc + "2", "p" + rc + "3"));
      bi.push_back(bin("s" + rc, Opcode::Add, ScalarKind::F32, "s" + rc + "a",
                       "s" + rc + "b"));
      bi.push_back(bin(name("v", r, c) + ".n", Opcode::Add, ScalarKind::F32,
                       name("v", r, c), "s" + rc));
    }
  }
  bi.push_back(bin("k.next", Opcode::Add, ScalarKind::I32, "k", "c4"));
  bi.push_back(bin("kc", Opcode::CmpLt, ScalarKind::I32, "k.next", "cN"));
  blk.term = TermKind::End;
  kl.blocks.push_back(std::move(blk));
  kl.latch_cond = "kc";
  return kl;
}

}  // namespace

Program gen_matmul(long n, bool aggressive_unroll) {
  if (n < 1) throw std::invalid_argument("gen_matmul: n must be >= 1");
  if (aggressive_unroll && n % 4 != 0)
    throw std::invalid_argument("gen_matmul: aggressive form requires 4 | n");
  Program p;
  p.name = aggressive_unroll ? "matmul_tile" : "matmul";
  p.spaces.push_back({"a", ScalarKind::F32, n * n, {}, 0});
  p.spaces.push_back({"b", ScalarKind::F32, n * n, {}, 0});
  p.spaces.push_back({"c", ScalarKind::F32, n * n, {}, 0});

  int step = aggressive_unroll ? 4 : 1;
  LoopRegion& il = p.body;
  il.trip_bound = n / step;
  il.preheader.push_back(cst_i32("c0", 0));
  il.preheader.push_back(cst_i32("c1", 1));
  if (aggressive_unroll) {
    il.preheader.push_back(cst_i32("c2", 2));
    il.preheader.push_back(cst_i32("c3", 3));
    il.preheader.push_back(cst_i32("c4", 4));
  }
  il.preheader.push_back(cst_i32("cN", static_cast<int32_t>(n)));
  il.preheader.push_back(cst_f32("fz", 0.0f));
  il.phis.push_back(phi("i", ScalarKind::I32, "c0", "i.next"));

  LoopRegion jl;
  jl.trip_bound = n / step;
  jl.phis.push_back(phi("j", ScalarKind::I32, "c0", "j.next"));

  if (!aggressive_unroll) {
    jl.seq.emplace_back();
    jl.seq.back().loop = std::make_unique<LoopRegion>(matmul_inner_plain(n));
    auto post = [&](Instruction in) {
      jl.seq.emplace_back();
      jl.seq.back().inst = std::make_unique<Instruction>(std::move(in));
    };
    post(bin("c.row", Opcode::Mul, ScalarKind::I32, "i", "cN"));
    post(bin("c.addr", Opcode::Add, ScalarKind::I32, "c.row", "j"));
    post(store("c", "c.addr", "v.next", ScalarKind::F32));
    post(bin("j.next", Opcode::Add, ScalarKind::I32, "j", "c1"));
    post(bin("jc", Opcode::CmpLt, ScalarKind::I32, "j.next", "cN"));
  } else {
    auto pre = [&](Instruction in) {
      jl.seq.emplace_back();
      jl.seq.back().inst = std::make_unique<Instruction>(std::move(in));
    };
    for (int r = 1; r < 4; r++)
      pre(bin("i" + std::to_string(r), Opcode::Add, ScalarKind::I32, "i",
              "c" + std::to_string(r)));
    for (int c = 1; c < 4; c++)
      pre(bin("j" + std::to_string(c), Opcode::Add, ScalarKind::I32, "j",
              "c" + std::to_string(c)));
    jl.seq.emplace_back();
    jl.seq.back().loop = std::make_unique<LoopRegion>(matmul_inner_tile(n));
    auto post = pre;
    for (int r = 0; r < 4; r++) {
      std::string iv = r == 0 ? "i" : "i" + std::to_string(r);
      post(bin("crow" + std::to_string(r), Opcode::Mul, ScalarKind::I32, iv,
               "cN"));
      for (int c = 0; c < 4; c++) {
        std::string jv = c == 0 ? "j" : "j" + std::to_string(c);
        std::string rc = std::to_string(r) + std::to_string(c);
        post(bin("cad" + rc, Opcode::Add, ScalarKind::I32,
                 "crow" + std::to_string(r), jv));
        post(store("c", "cad" + rc, "v" + rc + ".n", ScalarKind::F32));
      }
    }
    post(bin("j.next", Opcode::Add, ScalarKind::I32, "j", "c4"));
    post(bin("jc", Opcode::CmpLt, ScalarKind::I32, "j.next", "cN"));
  }
  jl.latch_cond = "jc";

  il.seq.emplace_back();
  il.seq.back().loop = std::make_unique<LoopRegion>(std::move(jl));
  auto ipost = [&](Instruction in) {
    il.seq.emplace_back();
    il.seq.back().inst = std::make_unique<Instruction>(std::move(in));
  };
  ipost(bin("i.next", Opcode::Add, ScalarKind::I32, "i",
            aggressive_unroll ? "c4" : "c1"));
  ipost(bin("ic", Opcode::CmpLt, ScalarKind::I32, "i.next", "cN"));
  il.latch_cond = "ic";
  return p;
}

Program gen_stream(const std::vector<uint8_t>& ops,
                   const std::vector<float>& xs,
                   const std::vector<float>& ys) {
  if (ops.size() != xs.size() || ops.size() != ys.size())
    throw std::invalid_argument("gen_stream: sequence length mismatch");
  if (ops.empty()) throw std::invalid_argument("gen_stream: empty sequences");
  long len = static_cast<long>(ops.size());

  Program p;
  p.name = "stream";
  StreamPort xp{"x_pipe", PortDir::In, ScalarKind::F32, {}, 0};
  StreamPort yp{"y_pipe", PortDir::In, ScalarKind::F32, {}, 0};
  StreamPort op{"op_pipe", PortDir::In, ScalarKind::U8, {}, 0};
  StreamPort zp{"z_pipe", PortDir::Out, ScalarKind::F32, {}, 0};
  for (size_t t = 0; t < ops.size(); t++) {
    xp.backing_bits.push_back(f32_bits(xs[t]));
    yp.backing_bits.push_back(f32_bits(ys[t]));
    op.backing_bits.push_back(ops[t]);
  }
  p.ports = {std::move(xp), std::move(yp), std::move(op), std::move(zp)};

  LoopRegion& l = p.body;
  l.trip_bound = len;
  l.preheader.push_back(cst_i32("c0", 0));
  l.preheader.push_back(cst_i32("c1", 1));
  l.preheader.push_back(cst_i32("cL", static_cast<int32_t>(len)));
  l.preheader.push_back(cst_f32("fz", 0.0f));
  for (int v = 0; v < 4; v++)
    l.preheader.push_back(cst("k" + std::to_string(v), ScalarKind::U8,
                              static_cast<uint32_t>(v)));
  l.phis.push_back(phi("I", ScalarKind::I32, "c0", "I.next"));

  auto block = [](const std::string& label) {
    BasicBlock b;
    b.label = label;
    return b;
  };
  auto piperead = [](const std::string& id, const std::string& port,
                     ScalarKind k) {
    Instruction in;
    in.id = id;
    in.op = Opcode::PipeRead;
    in.kind = k;
    in.target = port;
    return in;
  };

  BasicBlock entry = block("entry");
  entry.insts.push_back(piperead("x", "x_pipe", ScalarKind::F32));
  entry.insts.push_back(piperead("y", "y_pipe", ScalarKind::F32));
  entry.insts.push_back(piperead("opc", "op_pipe", ScalarKind::U8));
  entry.insts.push_back(bin("p0", Opcode::CmpEq, ScalarKind::U8, "opc", "k0"));
  entry.term = TermKind::Br;
  entry.br_cond = "p0";
  entry.succ_true = "bmul";
  entry.succ_false = "belse1";

  BasicBlock bmul = block("bmul");
  bmul.insts.push_back(bin("r0", Opcode::Mul, ScalarKind::F32, "x", "y"));
  bmul.term = TermKind::Jmp;
  bmul.succ_false = "merge";

  BasicBlock belse1 = block("belse1");
  belse1.insts.push_back(bin("p1", Opcode::CmpEq, ScalarKind::U8, "opc", "k1"));
  belse1.term = TermKind::Br;
  belse1.br_cond = "p1";
  belse1.succ_true = "badd";
  belse1.succ_false = "belse2";

  BasicBlock badd = block("badd");
  badd.insts.push_back(bin("r1", Opcode::Add, ScalarKind::F32, "x", "y"));
  badd.term = TermKind::Jmp;
  badd.succ_false = "merge";

  BasicBlock belse2 = block("belse2");
  belse2.insts.push_back(bin("p2", Opcode::CmpEq, ScalarKind::U8, "opc", "k2"));
  belse2.term = TermKind::Br;
  belse2.br_cond = "p2";
  belse2.succ_true = "bsq";
  belse2.succ_false = "belse3";

  BasicBlock bsq = block("bsq");
  bsq.insts.push_back(bin("xx", Opcode::Mul, ScalarKind::F32, "x", "x"));
  bsq.insts.push_back(bin("yy", Opcode::Mul, ScalarKind::F32, "y", "y"));
  bsq.insts.push_back(bin("r2", Opcode::Sub, ScalarKind::F32, "xx", "yy"));
  bsq.term = TermKind::Jmp;
  bsq.succ_false = "merge";

  BasicBlock belse3 = block("belse3");
  belse3.insts.push_back(bin("p3", Opcode::CmpEq, ScalarKind::U8, "opc", "k3"));
  belse3.term = TermKind::Br;
  belse3.br_cond = "p3";
  belse3.succ_true = "bsum";
  belse3.succ_false = "bdef";

  BasicBlock bsum = block("bsum");
  bsum.insts.push_back(bin("ssum", Opcode::Add, ScalarKind::F32, "x", "y"));
  bsum.insts.push_back(bin("r3", Opcode::Mul, ScalarKind::F32, "ssum", "ssum"));
  bsum.term = TermKind::Jmp;
  bsum.succ_false = "merge";

  BasicBlock bdef = block("bdef");
  bdef.term = TermKind::Jmp;
  bdef.succ_false = "merge";

  BasicBlock merge = block("merge");
  {
    Instruction ph;
    ph.id = "result";
    ph.op = Opcode::Phi;
    ph.kind = ScalarKind::F32;
    ph.incomings = {{"bmul", "r0"},
                    {"badd", "r1"},
                    {"bsq", "r2"},
                    {"bsum", "r3"},
                    {"bdef", "fz"}};
    merge.insts.push_back(ph);
  }
  {
    Instruction wr;
    wr.op = Opcode::PipeWrite;
    wr.kind = ScalarKind::F32;
    wr.target = "z_pipe";
    wr.operands = {"result"};
    merge.insts.push_back(wr);
  }
  merge.insts.push_back(bin("I.next", Opcode::Add, ScalarKind::I32, "I", "c1"));
  merge.insts.push_back(
      bin("cond", Opcode::CmpLt, ScalarKind::I32, "I.next", "cL"));
  merge.term = TermKind::End;

  l.blocks = {std::move(entry), std::move(bmul),  std::move(belse1),
              std::move(badd),  std::move(belse2), std::move(bsq),
              std::move(belse3), std::move(bsum),  std::move(bdef),
              std::move(merge)};
  l.latch_cond = "cond";
  return p;
}

}  // namespace vc
