// Benchmark: serial reference vs OpenMP kernels.
//
// Times the two data-parallel workhorses (truncated sparse-polynomial
// multiplication and the Weyl fiber product) plus one end-to-end Fedosov
// solve, in both execution modes, and checks the results agree exactly.

#include <chrono>
#include <iostream>

#include "dyt/par.hpp"
#include "dyt/weyl.hpp"

using namespace dyt;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

SPoly random_poly(const JetContext& ctx, Rng& rng, int terms, int xdeg) {
  // dense draw: base-variable degree up to 12, group degree up to xdeg
  std::vector<Term> t;
  for (int k = 0; k < terms; ++k) {
    Mono m;
    for (int v = 0; v < ctx.n_base; ++v) m.e[size_t(v)] = uint8_t(rng.range(0, 12));
    int left = xdeg;
    for (int v = ctx.group_lo(); v < ctx.group_hi(); ++v) {
      int e = int(rng.range(0, left));
      m.e[size_t(v)] = uint8_t(e);
      left -= e;
    }
    t.push_back({m, rng.rational(20, 7)});
  }
  return SPoly::from_terms(std::move(t));
}

}  // namespace

int main() {
  std::cout << "workers available: " << omp_get_max_threads() << "\n\n";

  // --- kernel 1: truncated polynomial product ---
  JetContext ctx = JetContext::make(1, 3, 8, 2, {Rational(1)});
  Rng rng(12345);
  SPoly a = random_poly(ctx, rng, 3000, 8);
  SPoly b = random_poly(ctx, rng, 3000, 8);
  SPoly::TruncSpec spec{ctx.group_lo(), ctx.group_hi(), ctx.Dx, ctx.hbar_index(), ctx.Nh};
  set_exec_mode(ExecMode::Serial);
  auto t0 = Clock::now();
  SPoly prod_serial = SPoly::mul_truncated(a, b, spec);
  double serial_ms = ms_since(t0);
  set_exec_mode(ExecMode::Parallel);
  t0 = Clock::now();
  SPoly prod_parallel = SPoly::mul_truncated(a, b, spec);
  double parallel_ms = ms_since(t0);
  std::cout << "poly multiply (" << a.size() << " x " << b.size() << " terms):\n"
            << "  serial   " << serial_ms << " ms\n"
            << "  parallel " << parallel_ms << " ms\n"
            << "  identical: " << (prod_serial == prod_parallel ? "yes" : "NO") << "\n\n";

  // --- kernel 2: Weyl fiber product on the so(3) model ---
  LieAlgebraData L = LieAlgebraData::so3();
  L.sub_h = {2};
  L.comp_m = {0, 1};
  JetModel M = build_jet_model(&ctx, &L, splitting_r_matrix(&ctx, L));
  WeylAlgebra W(&M, 2);
  WeylElement r = W.solve_connection({});
  set_exec_mode(ExecMode::Serial);
  t0 = Clock::now();
  WeylElement rr_serial = W.product_serial(r, r);
  double wserial = ms_since(t0);
  set_exec_mode(ExecMode::Parallel);
  t0 = Clock::now();
  WeylElement rr_parallel = W.product(r, r);
  double wparallel = ms_since(t0);
  std::cout << "weyl fiber product (r o r, " << r.terms().size() << " terms):\n"
            << "  serial   " << wserial << " ms\n"
            << "  parallel " << wparallel << " ms\n"
            << "  identical: " << ((rr_serial - rr_parallel).is_zero_upto(0x7fffffff) ? "yes" : "NO")
            << "\n\n";

  // --- end to end: star-operator extraction in both modes ---
  set_exec_mode(ExecMode::Serial);
  t0 = Clock::now();
  MultiDiffOp op_serial = W.star_operator(r);
  double eserial = ms_since(t0);
  set_exec_mode(ExecMode::Parallel);
  t0 = Clock::now();
  MultiDiffOp op_parallel = W.star_operator(r);
  double eparallel = ms_since(t0);
  bool same = (op_serial - op_parallel).is_zero_mod(2);
  std::cout << "star-operator extraction:\n"
            << "  serial   " << eserial << " ms\n"
            << "  parallel " << eparallel << " ms\n"
            << "  identical: " << (same ? "yes" : "NO") << "\n";
  return 0;
}
