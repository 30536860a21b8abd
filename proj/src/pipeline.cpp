#include "dyt/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dyt {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string artifact_version() { return "dyt 0.1.0"; }

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

namespace {

std::string hex64(uint64_t v) {
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return std::string(buf);
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw InputInvalid(path + ": " + what);
}

SPoly parse_poly(const Json& j, const std::string& path, int nvars) {
  // list of {"coeff": "p/q", "powers": [e_1..e_d]}
  if (!j.is_array()) bad(path, "expected a term list");
  SPoly p;
  for (size_t t = 0; t < j.size(); ++t) {
    const Json& term = j[t];
    if (!term.contains("coeff")) bad(path, "term without coeff");
    Rational c = Rational::parse(term["coeff"].get<std::string>());
    Mono m;
    if (term.contains("powers")) {
      const Json& pw = term["powers"];
      if (int(pw.size()) > nvars) bad(path, "too many powers");
      for (size_t v = 0; v < pw.size(); ++v) m.e[v] = uint8_t(pw[v].get<int>());
    }
    p += SPoly(c).mul_mono(m, Rational(1));
  }
  return p;
}

Json poly_to_json(const SPoly& p) {
  Json out = Json::array();
  for (auto& t : p.terms()) {
    Json term;
    term["coeff"] = t.c.to_string();
    Json powers = Json::array();
    int top = -1;
    for (int v = 0; v < kMaxVars; ++v)
      if (t.m.e[size_t(v)]) top = v;
    for (int v = 0; v <= top; ++v) powers.push_back(int(t.m.e[size_t(v)]));
    term["powers"] = powers;
    out.push_back(term);
  }
  return out;
}

Json jet_to_json(const JetScalar& v) {
  Json out;
  out["num"] = poly_to_json(v.num());
  Json den = Json::array();
  for (auto& df : v.den_factors()) {
    Json f;
    f["poly"] = poly_to_json(df.poly);
    f["exp"] = df.exp;
    den.push_back(f);
  }
  out["den"] = den;
  return out;
}

JetScalar jet_from_json(const Json& j, const JetContext* ctx) {
  JetScalar v(ctx, parse_poly(j["num"], "twist.num", ctx->n_vars()));
  for (auto& f : j["den"]) {
    SPoly den = parse_poly(f["poly"], "twist.den", ctx->n_base);
    for (int e = 0; e < f["exp"].get<int>(); ++e)
      v = JetScalar::fraction(ctx, v.num(), den).with_watermark(v.watermark());
  }
  return v;
}

struct Timer {
  Clock::time_point t0 = Clock::now();
  long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  }
};

void push_check(CertificateReport& rep, const std::string& name, bool pass,
                const std::string& detail, const Timer& t) {
  rep.checks.push_back({name, pass, detail, t.ms()});
}

// ---- shared pipeline pieces ----

struct ClassicalWork {
  JetContext ctx;
  DynamicalRMatrix R;
  std::vector<VecJet> left, right;
};

DynamicalRMatrix document_r_matrix(const InstanceDocument& doc, const JetContext* ctx) {
  if (doc.r_from_splitting) return splitting_r_matrix(ctx, doc.L);
  DynamicalRMatrix R;
  R.ctx = ctx;
  R.L = &doc.L;
  R.base_letters = doc.L.sub_h;
  R.r = WedgePoly(ctx, &doc.L, 2);
  for (auto& [i, j, num, den] : doc.r_terms) {
    JetScalar coeff = den.is_zero() || den == SPoly(Rational(1))
                          ? JetScalar(ctx, num)
                          : JetScalar::fraction(ctx, num, den);
    R.r.add_term({i, j}, coeff);
    if (!den.is_constant()) R.domain_certificate.push_back(den);
  }
  R.Z = WedgePoly(ctx, &doc.L, 3);
  for (auto& [i, j, k, c] : doc.z_terms) R.Z.add_term({i, j, k}, JetScalar(ctx, SPoly(c)));
  return R;
}

void run_classical_checks(const InstanceDocument& doc, CertificateReport& rep,
                          ClassicalWork& work, int Nh_for_ctx) {
  {
    Timer t;
    auto jrep = doc.L.jacobi_check();
    push_check(rep, "jacobi", jrep.ok, jrep.message, t);
    if (!jrep.ok) throw InputInvalid("lie_algebra.brackets: " + jrep.message);
    if (!doc.L.subalgebra_closed(doc.L.sub_h))
      throw InputInvalid("splitting.h: not closed under the bracket");
    if (!doc.L.comp_m.empty() && !doc.L.splitting_reductive())
      throw InputInvalid("splitting.m: [h,m] not contained in m");
  }
  work.ctx = JetContext::make(int(doc.L.sub_h.size()), doc.L.n, doc.Dx, Nh_for_ctx,
                              doc.base_point);
  if (doc.r_from_splitting) {
    Timer t;
    try {
      auto cert = nondegeneracy_certificate(&work.ctx, doc.L);
      std::string wit = "det W = " + cert.detW.to_string(work.ctx.var_names) + ", witness (";
      for (size_t i = 0; i < cert.witness.size(); ++i)
        wit += (i ? "," : "") + cert.witness[i].to_string();
      wit += ")";
      push_check(rep, "splitting-nondegenerate", true, wit, t);
    } catch (const IdenticallyDegenerate& e) {
      push_check(rep, "splitting-nondegenerate", false, e.what(), t);
      return;
    }
  }
  work.R = document_r_matrix(doc, &work.ctx);
  {
    Timer t;
    bool eq = is_equivariant(doc.L, work.R.base_letters, work.R.r);
    push_check(rep, "r-equivariance", eq, eq ? "" : "coadjoint/adjoint defect nonzero", t);
  }
  {
    Timer t;
    bool inv = work.R.Z.terms().empty() || invariance_check(work.R.Z);
    push_check(rep, "z-invariance", inv, "", t);
  }
  {
    Timer t;
    WedgePoly res = cdybe_residual(work.R);
    bool ok = res.is_zero_upto();
    push_check(rep, "cdybe-residual", ok, ok ? "exactly zero" : res.to_string(), t);
  }
  {
    Timer t;
    Rng rng(20260808);
    int count = 0;
    bool ok = true;
    std::string witness;
    for (int deg = 0; deg <= 2 && ok; ++deg) {
      auto battery =
          random_equivariant_cochains(&work.ctx, doc.L, work.R.base_letters, deg, 7, rng);
      for (auto& c : battery) {
        ++count;
        if (!dr_apply(work.R, dr_apply(work.R, c)).is_zero_upto()) {
          ok = false;
          witness = "degree-" + std::to_string(deg) + " cochain";
          break;
        }
      }
    }
    push_check(rep, "dr-squared", ok,
               ok ? std::to_string(count) + " randomized equivariant cochains" : witness, t);
  }
  work.left = invariant_vector_fields(&work.ctx, doc.L, Side::Left);
  work.right = invariant_vector_fields(&work.ctx, doc.L, Side::Right);
  {
    Timer t;
    MultiVecJet pi = build_pi_r(work.R, work.left);
    MultiVecJet rz = invariant_trivector(work.R.Z, work.right);
    bool ok = quasi_poisson_residual(pi, rz).is_zero_upto(work.ctx.Dx - 1);
    push_check(rep, "pi-jacobi", ok, "up to jet order " + std::to_string(work.ctx.Dx - 1), t);
    Timer t2;
    bool inv = true;
    for (auto& f : work.right)
      if (!MultiVecJet::schouten(MultiVecJet::from_vector(&work.ctx, f), pi)
               .is_zero_upto(work.ctx.Dx - 1))
        inv = false;
    for (size_t i = 0; i < doc.L.sub_h.size() && inv; ++i) {
      JetMatrix pim = bivector_matrix(pi, work.ctx.n_base + work.ctx.n_group);
      VecJet chi = hamiltonian_field(pim, JetScalar::variable(&work.ctx, int(i)));
      if (!MultiVecJet::schouten(MultiVecJet::from_vector(&work.ctx, chi), pi)
               .is_zero_upto(work.ctx.Dx - 1))
        inv = false;
    }
    push_check(rep, "pi-invariance", inv, "", t2);
  }
}

EnvTensor expected_semiclassical_skew(const JetContext* ctx, const PbwAlgebra* alg,
                                      const DynamicalRMatrix& R) {
  EnvTensor expect(ctx, alg, 2);
  for (auto& kv : R.r.terms()) {
    JetScalar c = kv.second.mul_hbar(1);
    expect.add(EnvTensor::Key{Mono::var(kv.first[0]), Mono::var(kv.first[1]), Mono::one()}, c);
    expect.add(EnvTensor::Key{Mono::var(kv.first[1]), Mono::var(kv.first[0]), Mono::one()}, -c);
  }
  return expect;
}

}  // namespace

InstanceDocument InstanceDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputInvalid("cannot open instance document: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

InstanceDocument InstanceDocument::parse(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw InputInvalid(std::string("document is not valid JSON: ") + e.what());
  }
  InstanceDocument doc;
  doc.raw = j.dump();
  doc.name = j.value("name", "unnamed");
  if (!j.contains("lie_algebra")) bad("lie_algebra", "missing");
  const Json& la = j["lie_algebra"];
  int n = la.value("dim", 0);
  if (n < 1 || n > 8) bad("lie_algebra.dim", "dimension out of range [1,8]");
  std::vector<std::string> names;
  if (la.contains("basis"))
    for (auto& b : la["basis"]) names.push_back(b.get<std::string>());
  doc.L = LieAlgebraData::make(n, names);
  if (la.contains("brackets")) {
    for (auto& br : la["brackets"]) {
      int i = br.value("i", 0), jdx = br.value("j", 0);
      if (i < 1 || i > n || jdx < 1 || jdx > n)
        bad("lie_algebra.brackets", "index out of range");
      if (!br.contains("coeffs")) bad("lie_algebra.brackets", "missing coeffs");
      for (auto& [k, v] : br["coeffs"].items()) {
        int kk = std::stoi(k);
        if (kk < 1 || kk > n) bad("lie_algebra.brackets.coeffs", "index out of range");
        doc.L.set_bracket(i - 1, jdx - 1, kk - 1, Rational::parse(v.get<std::string>()));
      }
    }
  }
  if (!j.contains("splitting")) bad("splitting", "missing");
  const Json& sp = j["splitting"];
  auto read_idx = [&](const char* key) {
    std::vector<int> out;
    if (!sp.contains(key)) return out;
    for (auto& v : sp[key]) {
      int i = v.get<int>();
      if (i < 1 || i > n) bad(std::string("splitting.") + key, "index out of range");
      out.push_back(i - 1);
    }
    return out;
  };
  doc.L.sub_h = read_idx("h");
  doc.L.comp_m = read_idx("m");
  doc.L.sub_t = read_idx("t");
  doc.L.comp_mp = read_idx("m_prime");
  if (doc.L.sub_h.empty() && !j.contains("r_matrix"))
    bad("splitting.h", "empty base requires an explicit r-matrix block");

  if (j.contains("r_matrix") && j["r_matrix"].is_string()) {
    if (j["r_matrix"].get<std::string>() != "from-splitting")
      bad("r_matrix", "unknown directive");
    doc.r_from_splitting = true;
  } else if (j.contains("r_matrix")) {
    doc.r_from_splitting = false;
    int d = int(doc.L.sub_h.size());
    for (auto& term : j["r_matrix"]["terms"]) {
      int i = term.value("i", 0), jdx = term.value("j", 0);
      if (i < 1 || i > n || jdx < 1 || jdx > n) bad("r_matrix.terms", "index out of range");
      SPoly num = parse_poly(term["num"], "r_matrix.terms.num", d);
      SPoly den = term.contains("den") ? parse_poly(term["den"], "r_matrix.terms.den", d)
                                       : SPoly(Rational(1));
      doc.r_terms.push_back({i - 1, jdx - 1, num, den});
    }
  }
  if (j.contains("Z")) {
    for (auto& term : j["Z"]["terms"]) {
      int i = term.value("i", 0), jdx = term.value("j", 0), k = term.value("k", 0);
      if (i < 1 || i > n || jdx < 1 || jdx > n || k < 1 || k > n)
        bad("Z.terms", "index out of range");
      doc.z_terms.push_back({i - 1, jdx - 1, k - 1,
                             Rational::parse(term["coeff"].get<std::string>())});
    }
  }
  if (!j.contains("truncation")) bad("truncation", "missing");
  const Json& tr = j["truncation"];
  doc.Nh = tr.value("hbar_order", 2);
  doc.Dx = tr.value("jet_order", 8);
  if (doc.Nh < 0 || doc.Nh > 4) bad("truncation.hbar_order", "out of range [0,4]");
  if (doc.Dx < 2 * doc.Nh + 2)
    bad("truncation.jet_order", "must satisfy jet_order >= 2*hbar_order + 2");
  if (doc.Dx > 12) bad("truncation.jet_order", "out of range (max 12)");
  if (!tr.contains("base_point")) bad("truncation.base_point", "missing");
  for (auto& v : tr["base_point"])
    doc.base_point.push_back(Rational::parse(v.get<std::string>()));
  doc.pipeline = j.value("pipeline", "classical");
  size_t want2 = doc.pipeline == "compose" ? doc.L.sub_t.size() : doc.L.sub_h.size();
  if (doc.base_point.size() != want2)
    bad("truncation.base_point", "expected " + std::to_string(want2) + " components");
  if (doc.pipeline != "classical" && doc.pipeline != "quantize" && doc.pipeline != "compose")
    bad("pipeline", "must be classical | quantize | compose");
  if (doc.pipeline == "compose" && doc.L.sub_t.empty())
    bad("splitting.t", "compose pipeline needs an inner splitting");
  return doc;
}

namespace {

void run_quantize_checks(const InstanceDocument& doc, CertificateReport& rep,
                         std::string* out_twist_json) {
  ClassicalWork work;
  run_classical_checks(doc, rep, work, doc.Nh);
  if (!rep.all_pass()) return;
  const JetContext* ctx = &work.ctx;
  DynamicalRMatrix R = document_r_matrix(doc, ctx);
  Timer tmodel;
  JetModel M = build_jet_model(ctx, &doc.L, R);
  {
    bool ok = M.omega.exterior_d().is_zero_upto(ctx->Dx - 2);
    FormJet dlam(ctx, 1);
    dlam.add_term({0}, JetScalar::one(ctx));
    ok = ok && M.omega.contract(M.chi[0]).equals_upto(dlam, ctx->Dx - 1);
    push_check(rep, "model-build", ok, "omega closed; iota_chi omega = d lambda", tmodel);
    if (!ok) return;
  }
  WeylAlgebra W(&M, doc.Nh);
  {
    Timer t;
    Rng rng(99);
    bool ok = true;
    for (int trial = 0; trial < 6 && ok; ++trial) {
      WeylElement a(ctx, W.cap());
      for (int s = 0; s < 5; ++s) {
        WeylKey k;
        k.hpow = uint8_t(rng.range(0, 1));
        for (int step = 0; step < 3; ++step)
          if (rng.range(0, 1)) k.y.e[size_t(rng.range(0, M.n_coords() - 1))] += 1;
        if (rng.range(0, 2) == 0) k.dxmask |= uint16_t(1u << rng.range(0, M.n_coords() - 1));
        if (k.fdeg() > W.cap() - 2) continue;
        a.add(k, JetScalar(ctx, SPoly(rng.rational(3, 2))));
      }
      ok = ok && W.kappa(W.kappa(a)).is_zero_upto() && W.delta(W.delta(a)).is_zero_upto();
      WeylElement hk = W.delta(W.kappa(a)) + W.kappa(W.delta(a));
      ok = ok && (hk + WeylElement::from_function(ctx, W.cap(), W.sigma(a))).equals_upto(a);
      WeylElement anti = W.delta(W.covariant_d(a)) + W.covariant_d(W.delta(a));
      ok = ok && anti.is_zero_upto();
      WeylElement dd = W.covariant_d(W.covariant_d(a));
      ok = ok && (dd + W.commutator(W.curvature_element(), a).div_hbar()).is_zero_upto();
    }
    push_check(rep, "weyl-identities", ok,
               "kappa^2, delta^2, homotopy, delta d + d delta, d^2 = -(1/hb)[R,-]", t);
    if (!ok) return;
  }
  Timer tsolve;
  WeylElement rfed = W.solve_connection({});
  {
    bool ok = W.kappa(rfed).is_zero_upto();
    ok = ok && rfed.component(3).equals_upto(W.kappa(-W.curvature_element()));
    WeylElement rhs = W.kappa(-W.curvature_element() + W.covariant_d(rfed) +
                              W.product(rfed, rfed).div_hbar());
    ok = ok && rfed.equals_upto(rhs);
    push_check(rep, "fedosov-fixed-point", ok, "kappa(r) = 0; residual zero at truncation",
               tsolve);
    if (!ok) return;
  }
  {
    Timer t;
    bool ok = true;
    for (int v = 0; v < M.n_coords() && ok; ++v) {
      JetScalar f = JetScalar::variable(ctx, v);
      WeylElement lift = W.flat_lift(f, rfed);
      ok = ok && W.sigma(lift).equals_upto(f);
      ok = ok && W.fedosov_D(rfed, lift).up_to_degree(W.cap() - 2).is_zero_upto();
    }
    push_check(rep, "flat-lifts", ok, "sigma section; D-closed through the guarded degree", t);
    if (!ok) return;
  }
  Timer tstar;
  MultiDiffOp star = W.star_operator(rfed);
  {
    bool ok = true;
    JetScalar one = JetScalar::one(ctx);
    for (auto& m : coordinate_monomials(ctx, 2)) {
      JetScalar f = mono_jet(ctx, m);
      ok = ok && star.apply2(one, f).equals_upto(f) && star.apply2(f, one).equals_upto(f);
    }
    push_check(rep, "star-unit", ok, "", tstar);
    if (!ok) return;
  }
  {
    Timer t;
    bool ok = true;
    Rng rng(7);
    auto monos = coordinate_monomials(ctx, 2);
    int tried = 0;
    for (auto& ma : monos) {
      for (auto& mb : monos) {
        if (rng.range(0, 5)) continue;
        for (auto& mc : monos) {
          if (rng.range(0, 5)) continue;
          ++tried;
          JetScalar A = mono_jet(ctx, ma), B = mono_jet(ctx, mb), Cm = mono_jet(ctx, mc);
          JetScalar lhs = star.apply2(star.apply2(A, B), Cm);
          JetScalar rhs = star.apply2(A, star.apply2(B, Cm));
          if (!(lhs - rhs).truncate_hbar(doc.Nh).is_zero_upto()) ok = false;
        }
      }
    }
    // semiclassical commutator on coordinate pairs
    for (int i = 0; i < M.n_coords() && ok; ++i)
      for (int j = 0; j < M.n_coords(); ++j) {
        JetScalar f = JetScalar::variable(ctx, i), g = JetScalar::variable(ctx, j);
        JetScalar comm = star.apply2(f, g) - star.apply2(g, f);
        JetScalar pb = poisson_bracket(M.pi_mat, f, g);
        if (!(comm - pb.mul_hbar(1)).truncate_hbar(1).is_zero_upto()) ok = false;
      }
    push_check(rep, "star-semiclassical",
               ok, "sampled associativity (" + std::to_string(tried) + " triples); commutators",
               t);
    if (!ok) return;
  }
  {
    Timer t;
    bool ok = true;
    std::string wit;
    for (int i = 0; i < ctx->n_base; ++i) {
      auto inv = strong_invariance_check(W, star, i, 3);
      if (!inv.ok) {
        ok = false;
        wit = inv.witness;
      }
    }
    push_check(rep, "strong-invariance", ok, wit, t);
    if (!ok) return;
  }
  PbwAlgebra alg(&doc.L);
  TwistSetup S{&M, &alg, SymMap{&alg, doc.L.sub_h}, doc.Nh};
  Timer tq;
  MultiDiffOp Q = build_gauge_Q(S, star);
  {
    bool ok = true;
    for (int i = 0; i < ctx->n_base; ++i) {
      JetScalar lam = JetScalar::variable(ctx, i);
      ok = ok && Q.apply1(lam).equals_upto(lam);
    }
    MultiDiffOp Qinv = MultiDiffOp::invert(Q, doc.Nh);
    for (auto& m : coordinate_monomials(ctx, 2)) {
      JetScalar f = mono_jet(ctx, m);
      ok = ok && Qinv.apply1(Q.apply1(f)).truncate_hbar(doc.Nh).equals_upto(f);
    }
    push_check(rep, "gauge-Q", ok, "Q(h) = h; Q^{-1} Q = id on the battery", tq);
    if (!ok) return;
  }
  Timer txu;
  MultiDiffOp starP = compatible_star(S, star, Q);
  {
    auto compat = compatibility_axioms_check(S, starP, 3);
    push_check(rep, "compatibility-axioms", compat.ok,
               compat.ok ? "" : compat.axiom + " at " + compat.witness, txu);
    if (!compat.ok) return;
  }
  Timer tex;
  EnvTensor J(ctx, &alg, 2);
  try {
    J = extract_twist(S, starP);
    push_check(rep, "twist-extract", true, "round trip against the operator verified", tex);
  } catch (const ExtractionInconsistent& e) {
    push_check(rep, "twist-extract", false, e.what(), tex);
    return;
  }
  {
    Timer t;
    EnvTensor skew = (J - J.swap_slots(0, 1)).truncate_hbar(1);
    EnvTensor expect = expected_semiclassical_skew(ctx, &alg, document_r_matrix(doc, ctx));
    bool ok = skew.equals_mod(expect, 1);
    push_check(rep, "twist-semiclassical", ok, "J - J^{21} = hbar r + O(hbar^2), exact", t);
    if (!ok) return;
  }
  {
    Timer t;
    bool ok = twist_is_equivariant(S, J);
    push_check(rep, "twist-equivariance", ok, "", t);
    if (!ok) return;
  }
  {
    Timer t;
    bool ok = twist_equation_residual(S, J).is_zero_mod(doc.Nh);
    push_check(rep, "twist-equation", ok,
               "residual zero mod hbar^" + std::to_string(doc.Nh + 1) + " (Phi = 1)", t);
    if (!ok) return;
  }
  if (out_twist_json) *out_twist_json = twist_to_json(doc, J);
}

void run_compose_checks(const InstanceDocument& doc, CertificateReport& rep) {
  if (doc.L.sub_t.empty()) throw InputInvalid("splitting.t: compose needs an inner splitting");
  Timer tbuild;
  std::unique_ptr<CompositionModel> holder =
      build_composition_model(doc.L, doc.Dx, doc.Nh, doc.base_point[0]);
  CompositionModel& C = *holder;
  push_check(rep, "compose-model", true, "product model X = V x H x U x G assembled", tbuild);
  {
    Timer t;
    bool ok = cdybe_residual(C.theta).is_zero_upto();
    push_check(rep, "compose-theta-residual", ok, "direct CDYBE route", t);
    if (!ok) return;
  }
  {
    Timer t;
    MultiVecJet piX = bivector_from_matrix(&C.ctx_X, C.pi_X);
    bool ok = MultiVecJet::schouten(piX, piX).is_zero_upto(C.ctx_X.Dx - 1);
    push_check(rep, "pi-X-jacobi", ok, "", t);
    if (!ok) return;
  }
  {
    Timer t;
    auto r1 = momentum_check_classical(C, MomentumKind::MuOnX, 2);
    push_check(rep, "momentum-mu", r1.ok, r1.witness, t);
    Timer t2;
    auto r2 = momentum_check_classical(C, MomentumKind::NuOnVH, 2);
    push_check(rep, "momentum-nu", r2.ok, r2.witness, t2);
    Timer t3;
    auto r3 = momentum_check_classical(C, MomentumKind::BaseOnUG, 2);
    push_check(rep, "momentum-base", r3.ok, r3.witness, t3);
    if (!r1.ok || !r2.ok || !r3.ok) return;
  }
  {
    Timer t;
    auto rr = reduced_bracket_check(C, 2);
    push_check(rep, "compose-routes-agree", rr.ok, rr.ok ? "reduction route matches" : rr.witness,
               t);
    if (!rr.ok) return;
  }
  {
    Timer t;
    auto qr = quantum_momentum_check(C, 2);
    push_check(rep, "quantum-momentum", qr.ok,
               qr.ok ? "morphism, commutator, product-model properties" : qr.property + ": " + qr.witness,
               t);
  }
}

}  // namespace

CertificateReport run_pipeline(const InstanceDocument& doc, std::string* out_twist_json) {
  CertificateReport rep;
  rep.artifact_version = artifact_version();
  rep.instance_name = doc.name;
  rep.instance_hash = hex64(fnv1a(doc.raw));
  rep.pipeline = doc.pipeline;
  rep.Nh = doc.Nh;
  rep.Dx = doc.Dx;
  if (doc.pipeline == "classical") {
    ClassicalWork work;
    run_classical_checks(doc, rep, work, 0);
  } else if (doc.pipeline == "quantize") {
    run_quantize_checks(doc, rep, out_twist_json);
  } else if (doc.pipeline == "compose") {
    run_compose_checks(doc, rep);
  } else {
    throw InputInvalid("pipeline: unknown selector " + doc.pipeline);
  }
  return rep;
}

std::string twist_to_json(const InstanceDocument& doc, const EnvTensor& J) {
  Json out;
  out["artifact"] = artifact_version();
  out["instance"] = doc.name;
  out["instance_hash"] = hex64(fnv1a(doc.raw));
  out["hbar_order"] = doc.Nh;
  Json basis = Json::array();
  for (auto& b : doc.L.basis_names) basis.push_back(b);
  out["basis"] = basis;
  Json terms = Json::array();
  for (auto& kv : J.terms()) {
    Json s1 = Json::array(), s2 = Json::array();
    for (int v = 0; v < doc.L.n; ++v) {
      s1.push_back(int(kv.first[0].e[size_t(v)]));
      s2.push_back(int(kv.first[1].e[size_t(v)]));
    }
    for (int k = 0; k <= doc.Nh; ++k) {
      JetScalar ck = kv.second.hbar_coefficient(k);
      if (ck.is_zero()) continue;
      Json term;
      term["hbar"] = k;
      term["slot1"] = s1;
      term["slot2"] = s2;
      term["coeff"] = jet_to_json(ck);
      terms.push_back(term);
    }
  }
  out["terms"] = terms;
  return out.dump(2) + "\n";
}

EnvTensor twist_from_json(const std::string& text, const JetContext* ctx,
                          const PbwAlgebra* alg) {
  Json j = Json::parse(text);
  EnvTensor J(ctx, alg, 2);
  for (auto& term : j["terms"]) {
    Mono m1, m2;
    for (size_t v = 0; v < term["slot1"].size(); ++v)
      m1.e[v] = uint8_t(term["slot1"][v].get<int>());
    for (size_t v = 0; v < term["slot2"].size(); ++v)
      m2.e[v] = uint8_t(term["slot2"][v].get<int>());
    int k = term.value("hbar", 0);
    J.add(EnvTensor::Key{m1, m2, Mono::one()}, jet_from_json(term["coeff"], ctx).mul_hbar(k));
  }
  return J;
}

std::string CertificateReport::to_json(bool with_timings) const {
  Json out;
  out["artifact"] = artifact_version;
  out["instance"] = instance_name;
  out["instance_hash"] = instance_hash;
  out["pipeline"] = pipeline;
  out["hbar_order"] = Nh;
  out["jet_order"] = Dx;
  Json checks = Json::array();
  for (auto& c : this->checks) {
    Json jc;
    jc["name"] = c.name;
    jc["status"] = c.pass ? "pass" : "fail";
    if (!c.detail.empty()) jc["detail"] = c.detail;
    if (with_timings) jc["ms"] = c.ms;
    checks.push_back(jc);
  }
  out["checks"] = checks;
  out["status"] = all_pass() ? "pass" : "fail";
  return out.dump(2) + "\n";
}

std::string CertificateReport::to_text() const {
  std::string out;
  out += artifact_version + "  " + pipeline + "  " + instance_name + "  (hash " +
         instance_hash + ")\n";
  out += "truncation: hbar_order " + std::to_string(Nh) + ", jet_order " + std::to_string(Dx) +
         "\n";
  for (auto& c : checks) {
    out += std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name;
    if (!c.detail.empty()) out += "  -- " + c.detail;
    out += "  (" + std::to_string(c.ms) + " ms)\n";
  }
  out += all_pass() ? "overall: pass\n" : "overall: FAIL\n";
  return out;
}

}  // namespace dyt
