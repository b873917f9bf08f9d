// symfiber: run verification suites, decompose tensors, evaluate operators.
//
// Exit codes: 0 pass / success, 1 identity failure, 2 invalid input or parameters.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <map>

#include "symfiber/harness.hpp"

using namespace symfiber;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write output file '" + path + "'");
  out << text;
}

const Json& need(const Json& j, const char* key) { return json_detail::field(j, key, ""); }

// ---- decompose

template <Scalar S>
Json decompose(const Json& in) {
  const auto K = sym_from_json<S>(in);
  if (K.n() < 2) throw SchemaError("/n: decomposition needs n >= 2");
  const auto parts = standard_decomposition(K);
  Json blocks = Json::array(), lambda_free = Json::array();
  bool ok = true;
  for (const auto& p : parts) {
    blocks.push_back(to_json(p));
    const bool lf = lambda_op(p).is_zero();
    lambda_free.push_back(lf);
    ok = ok && lf;
  }
  const auto back = reconstruct(parts);
  bool equal = back == K;
  if constexpr (ScalarTraits<S>::mode == ScalarMode::floating) {
    equal = (back - K).max_abs() <= 1e-12 * std::max(1.0, K.max_abs());
  }
  return {{"op", "decompose"},
          {"mode", std::string(ScalarTraits<S>::name)},
          {"input", to_json(K)},
          {"blocks", std::move(blocks)},
          {"convention", "K = sum_j L^j K_j with Lambda K_j = 0"},
          {"verification", {{"reconstruction_equal", equal}, {"lambda_free", std::move(lambda_free)}, {"ok", equal && ok}}}};
}

// ---- eval

template <Scalar S>
SectionJet2<S> valid_jet(const Json& in) {
  auto J = jet_from_json<S>(need(in, "jet"), "/jet");
  const auto v = validate_jet(J);
  if (!v.empty()) {
    // float input carries rounding in the commutation check
    bool real = ScalarTraits<S>::mode == ScalarMode::rational;
    for (const auto& x : v) real = real || x.magnitude > 1e-9 * std::max(1.0, J.max_abs());
    if (real) throw SchemaError("/jet: invalid jet: " + v.front().invariant + " at " + v.front().location);
  }
  return J;
}

template <Scalar S>
std::vector<S> vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array");
  std::vector<S> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(scalar_from_json<S>(j[i], json_detail::at(path, i)));
  return out;
}

template <Scalar S>
Json vector_to_json(const std::vector<S>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(scalar_to_json(x));
  return out;
}

/// Sym tensor when the block has no "r", twisted otherwise.
template <Scalar S, class F>
Json on_tensor(const Json& j, const std::string& path, F&& f) {
  if (j.is_object() && j.contains("r")) return f(twisted_from_json<S>(j, path));
  return f(sym_from_json<S>(j, path));
}

template <Scalar S>
Json fiber_result(const FiberField<S>& f) {
  return to_json(f);
}

template <Scalar S>
using EvalFn = std::function<Json(const Json&)>;

template <Scalar S>
const std::map<std::string, std::pair<std::string, EvalFn<S>>>& eval_table() {
  static const std::map<std::string, std::pair<std::string, EvalFn<S>>> table = [] {
    std::map<std::string, std::pair<std::string, EvalFn<S>>> t;
    // algebra
    t["lambda"] = {"{K}: trace Lambda K", [](const Json& in) {
                     return Json{{"output", to_json(lambda_op(sym_from_json<S>(need(in, "K"), "/K")))}};
                   }};
    t["L"] = {"{K}: L K = |x|^2 K", [](const Json& in) {
                return Json{{"output", to_json(l_op(sym_from_json<S>(need(in, "K"), "/K")))}};
              }};
    t["trace_free_part"] = {"{K}: trace-free part K_0", [](const Json& in) {
                              return Json{{"output", to_json(trace_free_part(sym_from_json<S>(need(in, "K"), "/K")))}};
                            }};
    t["vec_mul"] = {"{v, K}: v . K", [](const Json& in) {
                      const auto v = vector_from_json<S>(need(in, "v"), "/v");
                      const auto K = sym_from_json<S>(need(in, "K"), "/K");
                      if (static_cast<int>(v.size()) != K.n()) throw SchemaError("/v: length differs from n");
                      return Json{{"output", to_json(vec_mul(v, K))}};
                    }};
    t["contract"] = {"{v, K}: v-contraction of K", [](const Json& in) {
                       const auto v = vector_from_json<S>(need(in, "v"), "/v");
                       const auto K = sym_from_json<S>(need(in, "K"), "/K");
                       if (static_cast<int>(v.size()) != K.n()) throw SchemaError("/v: length differs from n");
                       return Json{{"output", to_json(contract(v, K))}};
                     }};
    t["inner"] = {"{A, B}: <A, B>", [](const Json& in) {
                    const auto A = sym_from_json<S>(need(in, "A"), "/A");
                    const auto B = sym_from_json<S>(need(in, "B"), "/B");
                    if (A.n() != B.n() || A.degree() != B.degree()) throw SchemaError("/B: shape differs from /A");
                    return Json{{"output", scalar_to_json(inner(A, B))}};
                  }};
    t["decompose"] = {"tensor: standard decomposition (same as the decompose command)",
                      [](const Json& in) { return decompose<S>(in); }};
    // curvature
    t["q_R"] = {"{R, K}: q(R) K by its defining sum and by the frame formula", [](const Json& in) {
                  const auto R = curvature_from_json<S>(need(in, "R"), "/R");
                  return on_tensor<S>(need(in, "K"), "/K", [&](const auto& K) {
                    if (K.n() != R.n()) throw SchemaError("/K/n: differs from /R/n");
                    const auto a = q_R(R, K);
                    const auto b = q_R_frame_formula(R, K);
                    return Json{{"definition", to_json(a)}, {"frame_formula", to_json(b)}, {"equal", a == b}};
                  });
                }};
    t["q_R_E"] = {"{R, RE, K}: q(R)^E K on a twisted tensor", [](const Json& in) {
                    const auto R = curvature_from_json<S>(need(in, "R"), "/R");
                    const auto RE = bundle_curvature_from_json<S>(need(in, "RE"), "/RE");
                    const auto K = twisted_from_json<S>(need(in, "K"), "/K");
                    if (K.n() != R.n() || RE.n() != R.n() || RE.rank() != K.rank())
                      throw SchemaError("/K: dimensions differ from /R or /RE");
                    return Json{{"output", to_json(q_R_E(R, RE, K))}};
                  }};
    // fiber
    t["pullback"] = {"{K}: restriction of K to the unit sphere (FiberField)", [](const Json& in) {
                       return on_tensor<S>(need(in, "K"), "/K", [](const auto& K) {
                         if (K.n() < 2) throw SchemaError("/K/n: fiber fields need n >= 2");
                         if constexpr (std::is_same_v<std::decay_t<decltype(K)>, SymTensor<S>>) {
                           return Json{{"output", to_json(pullback(TwistedTensor<S>::untwisted(K)))}};
                         } else {
                           return Json{{"output", to_json(pullback(K))}};
                         }
                       });
                     }};
    t["vertical_gradient"] = {"{f}: vertical gradient (NormalField)", [](const Json& in) {
                                return Json{{"output", to_json(vertical_gradient(fiber_from_json<S>(need(in, "f"), "/f")))}};
                              }};
    t["vertical_laplacian"] = {"{f}: vertical Laplacian", [](const Json& in) {
                                 return Json{{"output", to_json(vertical_laplacian(fiber_from_json<S>(need(in, "f"), "/f")))}};
                               }};
    t["vertical_div_star"] = {"{W}: vertical divergence adjoint of a NormalField", [](const Json& in) {
                                return Json{{"output", to_json(vertical_adjoint(normal_from_json<S>(need(in, "W"), "/W")))}};
                              }};
    t["l2_inner"] = {"{f, g}: L2 pairing on the sphere, normalized by its volume", [](const Json& in) {
                       const auto f = fiber_from_json<S>(need(in, "f"), "/f");
                       const auto g = fiber_from_json<S>(need(in, "g"), "/g");
                       if (f.n() != g.n() || f.rank() != g.rank()) throw SchemaError("/g: dimensions differ from /f");
                       return Json{{"output", scalar_to_json(l2_inner(f, g))}};
                     }};
    // jets
    t["validate_jet"] = {"{jet}: list violated jet invariants", [](const Json& in) {
                           const auto J = jet_from_json<S>(need(in, "jet"), "/jet");
                           Json v = Json::array();
                           for (const auto& x : validate_jet(J))
                             v.push_back({{"invariant", x.invariant}, {"location", x.location}, {"magnitude", x.magnitude}});
                           return Json{{"valid", v.empty()}, {"violations", std::move(v)}};
                         }};
    t["D"] = {"{jet}: symmetrized derivative D K", [](const Json& in) {
                return Json{{"output", to_json(op_D(valid_jet<S>(in)))}};
              }};
    t["D_star"] = {"{jet}: divergence D* K", [](const Json& in) {
                     return Json{{"output", to_json(op_D_star(valid_jet<S>(in)))}};
                   }};
    t["D0"] = {"{jet}: trace-free symmetrized derivative D0 K", [](const Json& in) {
                 return Json{{"output", to_json(op_D0(valid_jet<S>(in)))}};
               }};
    t["D0_star"] = {"{jet}: D0* K", [](const Json& in) {
                      return Json{{"output", to_json(op_D0_star(valid_jet<S>(in)))}};
                    }};
    t["weitzenbock"] = {"{jet}: residual of the twisted Weitzenbock formula", [](const Json& in) {
                          const auto res = weitzenbock_residual(valid_jet<S>(in));
                          return Json{{"lhs", to_json(res.lhs)},
                                      {"rhs", to_json(res.rhs)},
                                      {"residual", to_json(res.residual)},
                                      {"residual_is_zero", res.residual.is_zero()},
                                      {"max_abs", res.max_abs},
                                      {"scale", res.scale}};
                        }};
    t["X"] = {"{jet}: geodesic vector field X on pi*K", [](const Json& in) {
                return Json{{"output", to_json(op_X(valid_jet<S>(in)))}};
              }};
    t["Z"] = {"{jet}: Z_k pi*K (NormalField)", [](const Json& in) {
                return Json{{"output", to_json(op_Z(valid_jet<S>(in)))}};
              }};
    t["pestov"] = {"{jet}: residual of the localized Pestov identity on pi*K", [](const Json& in) {
                     const auto res = pestov_residual(valid_jet<S>(in));
                     return Json{{"lhs", to_json(res.lhs)},
                                 {"rhs", to_json(res.rhs)},
                                 {"residual", to_json(res.residual)},
                                 {"residual_is_zero", res.residual.is_zero()},
                                 {"max_abs", res.max_abs},
                                 {"scale", res.scale}};
                   }};
    // generators
    t["random_jet"] = {"{n, k, r, seed}: seeded random valid jet", [](const Json& in) {
                         const int n = json_detail::int_field(in, "n", "", 2, 12);
                         const int k = json_detail::int_field(in, "k", "", 0, 12);
                         const int r = json_detail::int_field(in, "r", "", 1, 8);
                         const Json& sj = need(in, "seed");
                         if (!sj.is_number_unsigned()) throw SchemaError("/seed: expected a nonnegative integer");
                         Rng rng(sj.get<std::uint64_t>());
                         const auto J = random_jet<Rational>(n, k, r, random_curvature<Rational>(n, rng),
                                                             random_bundle_curvature<Rational>(n, r, rng), rng);
                         return Json{{"output", to_json(J)}};
                       }};
    t["constant_curvature"] = {"{n, c}: R = c id on Lambda^2 (c = -1 is the unit sphere)", [](const Json& in) {
                                 const int n = json_detail::int_field(in, "n", "", 2, 32);
                                 return Json{{"output", to_json(constant_curvature<S>(n, scalar_from_json<S>(need(in, "c"), "/c")))}};
                               }};
    return t;
  }();
  return table;
}

template <Scalar S>
Json eval(const std::string& op, const Json& in) {
  const auto& table = eval_table<S>();
  auto it = table.find(op);
  if (it == table.end()) throw UsageError("unknown operation '" + op + "' (see: symfiber list)");
  if (op == "decompose") return it->second.second(in);
  Json out = it->second.second(in);
  Json full = {{"op", op}, {"mode", std::string(ScalarTraits<S>::name)}, {"input", in}};
  for (auto& [key, value] : out.items()) full[key] = value;
  return full;
}

// ---- verify

struct VerifyFlags {
  std::string n_range = "3..5", k_range = "1..3", r_range = "1..2";
  int trials = 10;
  std::string mode = "rational";
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::vector<std::string> suites{"all"};
  std::string out, format = "json", mutate;
  bool no_run_info = false;
};

int cmd_verify(const VerifyFlags& f) {
  SuiteConfig cfg;
  cfg.n = parse_range(f.n_range);
  cfg.k = parse_range(f.k_range);
  cfg.r = parse_range(f.r_range);
  for (const auto* r : {&cfg.n, &cfg.k, &cfg.r}) {
    if (r->empty()) throw UsageError("empty range " + range_str(*r));
  }
  cfg.trials = f.trials;
  cfg.mode = parse_mode(f.mode);
  cfg.tol = f.tol;
  cfg.seed = f.seed;
  for (const auto& s : f.suites) {
    if (s == "all") {
      cfg.suites.clear();
      break;
    }
    cfg.suites.push_back(s);
  }
  cfg.mutation = f.mutate;
  const SuiteReport rep = run_suite(cfg);
  const std::string text = f.format == "csv" ? to_csv(rep) : to_json(rep, !f.no_run_info).dump(2) + "\n";
  write_output(f.out, text);

  std::size_t cells = 0;
  for (const auto& ir : rep.identities) cells += ir.cells.size();
  if (!rep.suites_without_cells.empty()) {
    std::cerr << "symfiber verify: no runnable cells for suite(s):";
    for (const auto& s : rep.suites_without_cells) std::cerr << " " << s;
    std::cerr << " (every cell of the grid is outside their domain)\n";
    return kExitInvalid;
  }
  std::cerr << "symfiber verify: " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.identities.size() << " identities, "
            << cells << " cells, " << rep.wall_seconds << " s, " << rep.threads << " threads)\n";
  for (const auto& ir : rep.identities) {
    if (ir.status == "fail") std::cerr << "  failed: " << ir.name << "\n";
  }
  return rep.pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symfiber: exact verification of symmetric tensor and unit-sphere-bundle identities"};
  app.require_subcommand(1);

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "run the seeded verification suites over a parameter grid");
  verify->add_option("--n-range", vf.n_range, "dimension range a..b")->capture_default_str();
  verify->add_option("--k-range", vf.k_range, "tensor degree range a..b")->capture_default_str();
  verify->add_option("--r-range", vf.r_range, "twisting bundle rank range a..b")->capture_default_str();
  verify->add_option("--trials", vf.trials, "random draws per cell")->capture_default_str();
  verify->add_option("--mode", vf.mode, "scalar mode")->check(CLI::IsMember({"rational", "float"}))->capture_default_str();
  verify->add_option("--tol", vf.tol, "relative tolerance (float mode)")->capture_default_str();
  verify->add_option("--seed", vf.seed, "master seed")->capture_default_str();
  verify->add_option("--suite", vf.suites, "suites to run (comma separated, or all)")->delimiter(',')->capture_default_str();
  verify->add_option("--out", vf.out, "report path (default stdout)");
  verify->add_option("--format", vf.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  verify->add_option("--mutate", vf.mutate, "perturb one coefficient by +1 (negative control)");
  verify->add_flag("--no-run-info", vf.no_run_info, "omit the run block (timestamp, wall time, threads)");

  std::string mode = "rational", in_path, out_path, op;
  auto* decomp = app.add_subcommand("decompose", "standard decomposition of a tensor read as JSON");
  decomp->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}))->capture_default_str();
  decomp->add_option("--in", in_path, "input path (default stdin)");
  decomp->add_option("--out", out_path, "output path (default stdout)");

  auto* ev = app.add_subcommand("eval", "evaluate a named operation on JSON input");
  ev->add_option("op", op, "operation name (see: symfiber list)")->required();
  ev->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}))->capture_default_str();
  ev->add_option("--in", in_path, "input path (default stdin)");
  ev->add_option("--out", out_path, "output path (default stdout)");

  auto* list = app.add_subcommand("list", "list suites, identities, operations and mutations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (verify->parsed()) return cmd_verify(vf);
    if (list->parsed()) {
      Json out = {{"suites", suite_names()}, {"mutations", mutation_names()}};
      Json ids = Json::array();
      for (const auto& g : identity_groups())
        for (std::size_t i = 0; i < g.identities.size(); ++i)
          ids.push_back({{"suite", g.suite}, {"name", g.identities[i]}, {"negative_control", static_cast<bool>(g.controls[i])}});
      out["identities"] = std::move(ids);
      Json ops = Json::object();
      for (const auto& [name, entry] : eval_table<Rational>()) ops[name] = entry.first;
      out["operations"] = std::move(ops);
      std::cout << out.dump(2) << "\n";
      return kExitPass;
    }
    const Json in = parse_json(read_input(in_path));
    const bool rational = parse_mode(mode) == ScalarMode::rational;
    Json out;
    if (decomp->parsed()) {
      out = rational ? decompose<Rational>(in) : decompose<double>(in);
    } else {
      out = rational ? eval<Rational>(op, in) : eval<double>(op, in);
    }
    write_output(out_path, out.dump(2) + "\n");
    return kExitPass;
  } catch (const SchemaError& e) {
    std::cerr << "schema error at " << e.what() << "\n";
    return kExitInvalid;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitFail;
  }
}
