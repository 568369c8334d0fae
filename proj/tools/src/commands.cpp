#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iterator>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "lmlab/attention.hpp"
#include "lmlab/bpe.hpp"
#include "lmlab/capacity.hpp"
#include "lmlab/contexts.hpp"
#include "lmlab/error.hpp"
#include "lmlab/floatlab.hpp"
#include "lmlab/matrix_io.hpp"
#include "lmlab/micrograd.hpp"
#include "lmlab/uattention.hpp"

namespace lmlab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::ofstream RunContext::artifact(const std::string& name) {
  fs::create_directories(path(name).parent_path());
  std::ofstream os(path(name), std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path(name).string());
  artifacts_.push_back(name);
  return os;
}

void RunContext::write_json(const std::string& name, const ordered_json& j) {
  auto os = artifact(name);
  os << j.dump(2) << '\n';
}

namespace {

const ParamSpec kTrials{"trials", ParamType::integer, 1, "independent trials (seeds seed..seed+N-1)"};
const ParamSpec kParallel{"parallel", ParamType::flag, false, "run trials on separate threads"};

// Trial t uses seed + t. Results come back in trial order whether or not the
// trials ran concurrently.
template <class Fn>
auto run_trials(const Settings& s, Fn fn) {
  using R = std::invoke_result_t<Fn, std::uint64_t>;
  const auto n = s.count("trials");
  if (n == 0) throw ValidationError("--trials must be >= 1");
  std::vector<R> out;
  out.reserve(n);
  if (!s.flag("parallel") || n == 1) {
    for (std::size_t t = 0; t < n; ++t) out.push_back(fn(s.seed() + t));
    return out;
  }
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<R>> wave;
    for (std::size_t t = start; t < std::min(n, start + width); ++t) {
      wave.push_back(std::async(std::launch::async, fn, s.seed() + t));
    }
    for (auto& f : wave) out.push_back(f.get());
  }
  return out;
}

std::string join(const std::vector<std::uint32_t>& ids, char sep) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(ids[i]);
  }
  return s;
}

std::vector<std::uint32_t> token_list(const Settings& s, const std::string& name, std::size_t vocab) {
  std::vector<std::uint32_t> out;
  for (auto t : s.counts(name)) {
    if (t >= vocab) {
      throw ValidationError("--" + name + ": token " + std::to_string(t) + " is outside the vocabulary");
    }
    out.push_back(static_cast<std::uint32_t>(t));
  }
  if (out.empty()) throw ValidationError("--" + name + " must list at least one token");
  return out;
}

std::string read_file(const std::string& name, const std::string& path) {
  if (path.empty()) throw ValidationError("--" + name + " is required");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("--" + name + ": cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<attention::BlockParams> make_blocks(Rng& rng, const Settings& s) {
  const auto d = s.count("dim"), heads = s.count("heads"), layers = s.count("layers");
  if (d == 0 || heads == 0 || layers == 0) {
    throw ValidationError("--dim, --heads and --layers must be >= 1");
  }
  if (d % heads != 0) throw ValidationError("--dim must be divisible by --heads");
  std::vector<attention::BlockParams> blocks;
  for (std::size_t l = 0; l < layers; ++l) blocks.push_back(attention::random_block(rng, d, heads));
  return blocks;
}

// ---------------------------------------------------------------- gradcheck

struct GradRow {
  std::uint64_t seed = 0;
  std::size_t token = 0;
  int label = 0;
  double loss = 0.0;
  micrograd::GradCheck check;
};

int gradcheck(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto V = s.count("vocab"), d = s.count("dim"), h = s.count("hidden");
  const auto eps = s.real("eps"), tol = s.real("tol");
  if (V == 0 || d == 0 || h == 0) throw ValidationError("--vocab, --dim and --hidden must be >= 1");
  if (!(eps > 0.0)) throw ValidationError("--eps must be > 0");

  const auto rows = run_trials(s, [&](std::uint64_t seed) {
    Rng rng(seed);
    const auto p = micrograd::Params::random(rng, V, d, h);
    const auto k = static_cast<std::size_t>(rng.below(V));
    const int y = static_cast<int>(rng.below(2));
    const auto trace = micrograd::forward(p, k);
    const auto analytic = micrograd::backward(p, trace, y);
    const auto numeric = micrograd::finite_difference_grads(p, k, y, eps);
    return GradRow{seed, k, y, micrograd::loss(trace.yhat, y), micrograd::compare(analytic, numeric)};
  });

  double worst_rel = 0.0, worst_abs = 0.0;
  {
    auto os = ctx.artifact("gradcheck.csv");
    os << "seed,vocab,dim,hidden,token,label,loss,max_rel_error,max_abs_error,parameters,pass\n";
    for (const auto& r : rows) {
      worst_rel = std::max(worst_rel, r.check.max_rel_error);
      worst_abs = std::max(worst_abs, r.check.max_abs_error);
      os << r.seed << ',' << V << ',' << d << ',' << h << ',' << r.token << ',' << r.label << ','
         << format_double(r.loss) << ',' << format_double(r.check.max_rel_error) << ','
         << format_double(r.check.max_abs_error) << ',' << r.check.parameters << ','
         << (r.check.max_rel_error <= tol ? "true" : "false") << '\n';
    }
  }
  const bool pass = worst_rel <= tol;
  ctx.write_json("report.json", {{"trials", rows.size()},
                                 {"max_rel_error", worst_rel},
                                 {"max_abs_error", worst_abs},
                                 {"tolerance", tol},
                                 {"pass", pass}});
  if (s.flag("save-params")) {
    Rng rng(s.seed());
    micrograd::save(ctx.path("params"), micrograd::Params::random(rng, V, d, h), s.seed());
    for (const char* f : {"E.bin", "W1.bin", "b1.bin", "W2.bin", "b2.bin", "manifest.json"}) {
      ctx.record(std::string("params/") + f);
    }
  }
  ctx.out() << "gradcheck: " << rows.size() << " trial(s), max relative error "
            << format_double(worst_rel) << (pass ? " <= " : " > ") << format_double(tol) << '\n';
  return pass ? 0 : 3;
}

// ----------------------------------------------------------- attention-demo

int attention_demo(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto V = s.count("vocab");
  if (V == 0) throw ValidationError("--vocab must be >= 1");
  const auto a = token_list(s, "context-a", V);
  const auto b = token_list(s, "context-b", V);
  if (a.back() != b.back()) {
    throw ValidationError("--context-a and --context-b must end with the same token");
  }
  Rng rng(s.seed());
  const auto E = random_gaussian(rng, V, s.count("dim"), 1.0);
  const auto blocks = make_blocks(rng, s);

  // Causal weights of the first head on context A.
  const auto qkv = attention::qkv_project(attention::embed(E, a), blocks[0].heads[0]);
  const auto A = attention::attention_weights(qkv.Q, qkv.K, true);
  double row_err = 0.0, above = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) {
      sum += A(i, j);
      if (j > i) above = std::max(above, std::abs(A(i, j)));
    }
    row_err = std::max(row_err, std::abs(sum - 1.0));
  }
  save_csv(ctx.path("weights.csv"), A);
  ctx.record("weights.csv");

  // Changing the last token must leave every earlier causal output row unchanged.
  auto a2 = a;
  a2.back() = static_cast<std::uint32_t>((a2.back() + 1) % V);
  const auto Y = attention::run_blocks(attention::embed(E, a), blocks, true);
  const auto Y2 = attention::run_blocks(attention::embed(E, a2), blocks, true);
  bool prefix_identical = true;
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    for (std::size_t c = 0; c < Y.cols(); ++c) prefix_identical &= Y(i, c) == Y2(i, c);

  // The shared final token, contextualized by two different prefixes.
  const auto Za = attention::run_blocks(attention::embed(E, a), blocks, false);
  const auto Zb = attention::run_blocks(attention::embed(E, b), blocks, false);
  double dist2 = 0.0;
  for (std::size_t c = 0; c < Za.cols(); ++c) {
    const double diff = Za(Za.rows() - 1, c) - Zb(Zb.rows() - 1, c);
    dist2 += diff * diff;
  }
  {
    auto os = ctx.artifact("polysemy.csv");
    os << "context,position,token";
    for (std::size_t c = 0; c < Za.cols(); ++c) os << ",h" << c;
    os << '\n';
    const auto rows = [&](const char* label, const RealMatrix& Z, const std::vector<std::uint32_t>& ids) {
      for (std::size_t i = 0; i < Z.rows(); ++i) {
        os << label << ',' << i << ',' << ids[i];
        for (std::size_t c = 0; c < Z.cols(); ++c) os << ',' << format_double(Z(i, c));
        os << '\n';
      }
    };
    rows("a", Za, a);
    rows("b", Zb, b);
  }
  const bool ok = row_err <= 1e-12 && above == 0.0 && prefix_identical;
  ctx.write_json("report.json", {{"row_sum_max_error", row_err},
                                 {"max_weight_above_diagonal", above},
                                 {"causal_prefix_identical", prefix_identical},
                                 {"polysemy_distance", std::sqrt(dist2)},
                                 {"pass", ok}});
  ctx.out() << "attention-demo: polysemy distance " << format_double(std::sqrt(dist2))
            << ", causal prefix " << (prefix_identical ? "unchanged" : "CHANGED") << '\n';
  return ok ? 0 : 3;
}

// ------------------------------------------------------------------ generate

int generate(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto V = s.count("vocab");
  if (V == 0) throw ValidationError("--vocab must be >= 1");
  const auto prompt = token_list(s, "prompt", V);
  const auto T = s.real("temperature");
  if (!(T > 0.0)) throw ValidationError("--temperature must be > 0");
  Rng rng(s.seed());
  const auto E = random_gaussian(rng, V, s.count("dim"), 1.0);
  const auto blocks = make_blocks(rng, s);
  // Output embeddings scaled so logits are O(1) against a LayerNorm-ed state.
  const auto E_out = random_gaussian(rng, V, E.cols(), 1.0 / std::sqrt(static_cast<double>(E.cols())));
  const auto ids = attention::generate(blocks, E, E_out, prompt, T, s.count("steps"), rng);
  {
    auto os = ctx.artifact("tokens.csv");
    os << "position,token,source\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      os << i << ',' << ids[i] << ',' << (i < prompt.size() ? "prompt" : "sampled") << '\n';
    }
  }
  ctx.write_json("generation.json", {{"prompt", prompt}, {"tokens", ids}});
  ctx.out() << join(ids, ' ') << '\n';
  return 0;
}

// ----------------------------------------------------------------------- bpe

std::string hex_bytes(const std::string& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (unsigned char c : b) {
    s += digits[c >> 4];
    s += digits[c & 15];
  }
  return s;
}

int bpe_train(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto corpus = read_file("input", s.text("input"));
  const auto target = s.count("vocab-size");
  if (target < bpe::kByteTokens) throw ValidationError("--vocab-size must be >= 256");
  const auto vocab = bpe::train(corpus, target);
  bpe::save_vocabulary(ctx.path("vocab.jsonl"), vocab);
  ctx.record("vocab.jsonl");
  {
    auto os = ctx.artifact("merges.csv");
    os << "rank,left,right,id,bytes_hex\n";
    for (std::size_t r = 0; r < vocab.merges().size(); ++r) {
      const auto& m = vocab.merges()[r];
      os << r << ',' << m.left << ',' << m.right << ',' << m.id << ','
         << hex_bytes(vocab.bytes(m.id)) << '\n';
    }
  }
  const auto encoded = bpe::encode(vocab, corpus);
  ctx.write_json("report.json", {{"corpus_bytes", corpus.size()},
                                 {"target_size", target},
                                 {"vocab_size", vocab.size()},
                                 {"merges", vocab.merges().size()},
                                 {"encoded_tokens", encoded.size()}});
  ctx.out() << "bpe-train: " << vocab.merges().size() << " merges, vocabulary " << vocab.size()
            << '\n';
  return 0;
}

int bpe_encode(RunContext& ctx) {
  const auto& s = ctx.settings();
  if (s.text("vocab").empty()) throw ValidationError("--vocab is required");
  const auto vocab = bpe::load_vocabulary(s.text("vocab"));
  const bool have_text = !s.text("text").empty(), have_input = !s.text("input").empty();
  if (have_text == have_input) throw ValidationError("give exactly one of --text or --input");
  const auto text = have_text ? s.text("text") : read_file("input", s.text("input"));
  const auto ids = bpe::encode(vocab, text);
  ctx.write_json("tokens.json", {{"tokens", ids}});
  ctx.out() << join(ids, ' ') << '\n';
  return 0;
}

int bpe_decode(RunContext& ctx) {
  const auto& s = ctx.settings();
  if (s.text("vocab").empty()) throw ValidationError("--vocab is required");
  const auto vocab = bpe::load_vocabulary(s.text("vocab"));
  const bool have_list = !s.text("tokens").empty(), have_input = !s.text("input").empty();
  if (have_list == have_input) throw ValidationError("give exactly one of --tokens or --input");
  bpe::TokenSequence ids;
  if (have_list) {
    for (const auto& item : split_list(s.text("tokens"))) {
      try {
        ids.push_back(static_cast<bpe::TokenId>(std::stoul(item)));
      } catch (const std::exception&) {
        throw ValidationError("--tokens: '" + item + "' is not a token id");
      }
    }
  } else {
    const auto j = nlohmann::json::parse(read_file("input", s.text("input")), nullptr, false);
    if (j.is_discarded() || !j.contains("tokens")) {
      throw ValidationError("--input: expected a JSON object with a \"tokens\" array");
    }
    ids = j.at("tokens").get<bpe::TokenSequence>();
  }
  const auto decoded = bpe::decode(vocab, ids);
  {
    auto os = ctx.artifact("decoded.txt");
    os << decoded.text;
  }
  ctx.write_json("report.json", {{"tokens", ids.size()},
                                 {"bytes", decoded.text.size()},
                                 {"lossy", decoded.lossy}});
  ctx.out() << decoded.text << '\n';
  return 0;
}

// ------------------------------------------------------------------ capacity

struct CapacityTrial {
  std::vector<capacity::CapacityCurve> curves;
  std::vector<capacity::PackingReport> packing;
};

int capacity_cmd(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto eps = s.reals("epsilons");
  const auto dims = s.counts("dims");
  const auto pn = s.count("packing-n"), pd = s.count("packing-d");
  capacity::GreedyOptions opts;
  opts.max_attempts = s.count("max-attempts");
  if (eps.empty()) throw ValidationError("--epsilons must list at least one value");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) throw ValidationError("--epsilons entries must lie in (0, 1)");
  if (dims.size() < 2) throw ValidationError("--dims needs at least two dimensions");
  if (opts.max_attempts == 0) throw ValidationError("--max-attempts must be >= 1");
  if (pn == 1 || (pn > 0 && pd == 0)) throw ValidationError("--packing-n must be 0 or >= 2 with --packing-d >= 1");

  const auto trials = run_trials(s, [&](std::uint64_t seed) {
    CapacityTrial t;
    const Rng root(seed);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      Rng rng = root.split(i);
      t.curves.push_back(capacity::capacity_curve(rng, eps[i], dims, opts));
      if (pn > 0) {
        Rng prng = root.split(1000 + i);
        t.packing.push_back(capacity::measure_packing(prng, pn, pd, eps[i]));
      }
    }
    return t;
  });

  std::vector<std::uint64_t> curve_seeds, packing_seeds;
  std::vector<capacity::CapacityCurve> curves;
  std::vector<capacity::PackingReport> packing;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    for (const auto& c : trials[t].curves) {
      curve_seeds.push_back(s.seed() + t);
      curves.push_back(c);
    }
    for (const auto& p : trials[t].packing) {
      packing_seeds.push_back(s.seed() + t);
      packing.push_back(p);
    }
  }
  {
    auto os = ctx.artifact("curve.csv");
    capacity::write_curve_csv(os, curve_seeds, curves);
  }
  if (pn > 0) {
    auto os = ctx.artifact("packing.csv");
    capacity::write_packing_csv(os, packing_seeds, packing);
  }

  ordered_json per_eps = ordered_json::array();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    std::vector<capacity::CapacityCurve> same;
    double frac = 0.0;
    for (const auto& t : trials) {
      same.push_back(t.curves[i]);
      if (pn > 0) frac += t.packing[i].fraction_violating;
    }
    const auto fit = capacity::pooled_fit(same);
    ordered_json e = {{"epsilon", eps[i]},
                      {"pooled_slope", fit.slope},
                      {"pooled_intercept", fit.intercept},
                      {"pooled_r_squared", fit.r_squared}};
    if (pn > 0) {
      e["mean_fraction_violating"] = frac / static_cast<double>(trials.size());
      e["gaussian_tail_estimate"] = std::erfc(eps[i] * std::sqrt(static_cast<double>(pd)) / std::numbers::sqrt2);
    }
    per_eps.push_back(std::move(e));
    ctx.out() << "capacity: epsilon " << format_double(eps[i]) << " slope "
              << format_double(fit.slope) << " R^2 " << format_double(fit.r_squared) << '\n';
  }
  ctx.write_json("report.json", {{"max_attempts", opts.max_attempts},
                                 {"dims", dims},
                                 {"trials", trials.size()},
                                 {"epsilons", per_eps}});
  return 0;
}

// ------------------------------------------------------------------ contexts

int contexts_cmd(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto angle = s.real("angle");
  const auto lambdas = s.reals("lambdas"), mus = s.reals("mus"), grid = s.reals("grid");
  const auto noise = s.real("noise");
  if (lambdas.size() != 3 || mus.size() != 3) throw ValidationError("--lambdas and --mus need 3 values");
  if (grid.empty()) throw ValidationError("--grid must list at least one value");
  if (noise < 0.0) throw ValidationError("--noise must be >= 0");

  const auto e = contexts::ContextBasis::standard(3, "e", {"e1", "e2", "e3"});
  const auto f = contexts::rotated_about_z(angle);
  {
    auto os = ctx.artifact("f_basis.csv");
    os << "word,x,y,z\n";
    for (std::size_t i = 0; i < 3; ++i) {
      os << f.word(i);
      for (double x : f.vector(i)) os << ',' << format_double(x);
      os << '\n';
    }
  }
  {
    auto os = ctx.artifact("commutators.csv");
    os << "lambda1,lambda2,lambda3,mu1,mu2,mu3,commutator_norm,commutes\n";
    for (double l1 : grid)
      for (double l2 : grid)
        for (double m1 : grid)
          for (double m2 : grid) {
            const auto A = contexts::make_observable(e, {l1, l2, lambdas[2]});
            const auto B = contexts::make_observable(f, {m1, m2, mus[2]});
            const double c = contexts::commutator_norm(A, B);
            os << format_double(l1) << ',' << format_double(l2) << ',' << format_double(lambdas[2])
               << ',' << format_double(m1) << ',' << format_double(m2) << ','
               << format_double(mus[2]) << ',' << format_double(c) << ','
               << (c <= 1e-12 ? "true" : "false") << '\n';
          }
  }
  {
    auto os = ctx.artifact("born.csv");
    os << "state,context,word,probability\n";
    for (std::size_t k = 0; k < 3; ++k) {
      const auto psi = RealVector::basis(3, k);
      for (const auto* basis : {&e, &f}) {
        const auto p = contexts::born_probabilities(psi, *basis);
        for (std::size_t i = 0; i < 3; ++i) {
          os << e.word(k) << ',' << basis->label() << ',' << basis->word(i) << ','
             << format_double(p[i]) << '\n';
        }
      }
    }
  }

  Rng rng(s.seed());
  const auto graph = contexts::bank_graph(rng);
  contexts::save_graph(ctx.path("graph.json"), graph);
  ctx.record("graph.json");
  const auto report = contexts::intertwine_check(graph);

  // v(bank) plus a random direction of length `noise`, renormalized.
  RealVector token = graph.bases[0].vector(0);
  RealVector dir(3);
  for (auto& x : dir) x = rng.normal();
  token = normalized(token + noise * normalized(dir));
  ordered_json picks = ordered_json::object();
  {
    auto os = ctx.artifact("disambiguation.csv");
    os << "context,word,probability\n";
    for (const auto& b : graph.bases) {
      const auto d = contexts::disambiguate(token, graph, b.label());
      for (std::size_t i = 0; i < b.dim(); ++i) {
        os << b.label() << ',' << b.word(i) << ',' << format_double(d.probabilities[i]) << '\n';
      }
      picks[b.label()] = d.word;
    }
  }
  const auto A = contexts::make_observable(e, lambdas);
  const auto B = contexts::make_observable(f, mus);
  ctx.write_json("report.json",
                 {{"commutator_norm", contexts::commutator_norm(A, B)},
                  {"shared_vectors", report.shared_count},
                  {"max_multiplicity", report.max_multiplicity},
                  {"nontrivial_intertwining", report.nontrivial},
                  {"dimension_ok", report.dimension_ok},
                  {"disambiguation", picks}});
  ctx.out() << "contexts: [A1, A2] Frobenius norm "
            << format_double(contexts::commutator_norm(A, B)) << ", shared vectors "
            << report.shared_count << '\n';
  return 0;
}

// ---------------------------------------------------------------- uattention

uattention::Pipeline demo_pipeline() {
  using uattention::UnitaryOp;
  std::vector<UnitaryOp> stages{
      UnitaryOp::rotation(3, 0, 1, std::numbers::pi / 6),
      UnitaryOp::rotation(3, 1, 2, std::numbers::pi / 5, 0.3),
      UnitaryOp::permutation({2, 0, 1}),
  };
  return {std::move(stages), contexts::ComplexContextBasis::standard(3)};
}

int uattention_cmd(RunContext& ctx) {
  const auto& s = ctx.settings();
  const auto pipeline = s.text("circuit").empty() ? demo_pipeline()
                                                  : uattention::load_circuit(s.text("circuit"));
  const auto k = s.count("state");
  const auto shots = s.count("shots");
  if (k >= pipeline.dim()) throw ValidationError("--state must be < the circuit dimension");
  if (shots == 0) throw ValidationError("--shots must be >= 1");

  const auto psi = uattention::StateVector::basis(pipeline.dim(), k);
  const auto phi = pipeline.evolve(psi);
  const auto probs = pipeline.outcome_probabilities(psi);
  std::vector<std::size_t> counts(pipeline.dim(), 0);
  Rng rng(s.seed());
  for (std::size_t i = 0; i < shots; ++i) ++counts[pipeline.run(psi, rng).outcome];

  double worst_z = 0.0;
  {
    auto os = ctx.artifact("histogram.csv");
    os << "outcome,word,count,frequency,probability,std_error\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double freq = static_cast<double>(counts[i]) / static_cast<double>(shots);
      const double se = std::sqrt(probs[i] * (1.0 - probs[i]) / static_cast<double>(shots));
      if (se > 0.0) worst_z = std::max(worst_z, std::abs(freq - probs[i]) / se);
      os << i << ',' << pipeline.output_basis().word(i) << ',' << counts[i] << ','
         << format_double(freq) << ',' << format_double(probs[i]) << ',' << format_double(se)
         << '\n';
    }
  }
  {
    auto os = ctx.artifact("circuit.json");
    uattention::write_circuit(os, pipeline);
  }
  ctx.write_json("report.json", {{"dim", pipeline.dim()},
                                 {"input_state", k},
                                 {"shots", shots},
                                 {"evolved_norm", norm(phi.amplitudes())},
                                 {"max_abs_z", worst_z}});
  ctx.out() << "uattention: " << shots << " shots, max |z| " << format_double(worst_z) << '\n';
  return 0;
}

// ------------------------------------------------------------------ floatlab

int floatlab_cmd(RunContext& ctx) {
  using namespace floatlab;
  const auto& s = ctx.settings();
  const auto n_req = s.count("requests"), len = s.count("length");
  const auto sizes = s.counts("batch-sizes");
  const auto spread = s.real("spread");
  const auto& prec_name = s.text("precision");
  if (n_req == 0 || len == 0) throw ValidationError("--requests and --length must be >= 1");
  if (sizes.empty()) throw ValidationError("--batch-sizes must list at least one size");
  if (prec_name != "float64" && prec_name != "float32") {
    throw ValidationError("--precision must be float32 or float64");
  }
  const auto prec = prec_name == "float32" ? Precision::float32 : Precision::float64;

  const std::vector<double> witness{1e20, -1e20, 1.0};
  {
    auto os = ctx.artifact("witness.csv");
    os << "plan,sum,sum_hex\n";
    for (const auto& plan : {ReductionPlan::sequential(prec), ReductionPlan::pairwise_tree(prec),
                             ReductionPlan::chunked(2, prec), ReductionPlan::shuffled(s.seed(), prec)}) {
      const double r = reduce(witness, plan);
      os << plan.name() << ',' << format_double(r) << ',' << hex_bits(r) << '\n';
    }
  }

  // Random signs, magnitudes spread over `spread` decades.
  Rng rng(s.seed());
  std::vector<std::vector<double>> corpus(n_req, std::vector<double>(len));
  for (auto& req : corpus)
    for (auto& x : req) x = rng.normal() * std::pow(10.0, rng.uniform(-spread / 2, spread / 2));

  BatchMode varying{false, 1, prec};
  BatchMode fixed{true, s.count("fixed-chunk"), prec};
  const auto rv = batch_simulation(corpus, sizes, varying);
  const auto rf = batch_simulation(corpus, sizes, fixed);
  {
    auto os = ctx.artifact("batch_dependent.csv");
    write_report_csv(os, rv);
  }
  {
    auto os = ctx.artifact("deterministic.csv");
    write_report_csv(os, rf);
  }
  ctx.write_json("report.json",
                 {{"batch_dependent", {{"bitwise_identical", rv.bitwise_identical},
                                       {"max_abs_diff", rv.max_abs_diff}}},
                  {"deterministic", {{"bitwise_identical", rf.bitwise_identical},
                                     {"max_abs_diff", rf.max_abs_diff}}}});
  ctx.out() << "floatlab: batch-dependent " << (rv.bitwise_identical ? "identical" : "differs")
            << " (max diff " << format_double(rv.max_abs_diff) << "), deterministic "
            << (rf.bitwise_identical ? "identical" : "DIFFERS") << '\n';
  return rf.bitwise_identical ? 0 : 3;
}

}  // namespace

const std::vector<Command>& commands() {
  using T = ParamType;
  static const std::vector<Command> all{
      {"gradcheck",
       "compare backprop gradients of the token micronet with central differences",
       {{"vocab", T::integer, 20, "vocabulary size V"},
        {"dim", T::integer, 8, "embedding dimension d"},
        {"hidden", T::integer, 8, "hidden width h"},
        {"eps", T::real, micrograd::kDefaultFdEpsilon, "finite-difference step"},
        {"tol", T::real, 1e-6, "maximum allowed relative error"},
        {"save-params", T::flag, false, "also save the first trial's parameters"},
        kTrials,
        kParallel},
       gradcheck},
      {"attention-demo",
       "attention weights, causal-prefix check and polysemy distance for two contexts",
       {{"vocab", T::integer, 12, "vocabulary size"},
        {"dim", T::integer, 16, "model dimension"},
        {"heads", T::integer, 2, "attention heads"},
        {"layers", T::integer, 1, "transformer blocks"},
        {"context-a", T::count_list, {1, 2, 3, 7}, "first context (token ids)"},
        {"context-b", T::count_list, {4, 5, 6, 7}, "second context, same final token"}},
       attention_demo},
      {"generate",
       "temperature sampling from a random transformer",
       {{"vocab", T::integer, 16, "vocabulary size"},
        {"dim", T::integer, 16, "model dimension"},
        {"heads", T::integer, 2, "attention heads"},
        {"layers", T::integer, 2, "transformer blocks"},
        {"prompt", T::count_list, {1, 2, 3}, "prompt token ids"},
        {"steps", T::integer, 8, "tokens to sample"},
        {"temperature", T::real, 1.0, "sampling temperature"}},
       generate},
      {"bpe-train",
       "learn byte-pair merges from a text file",
       {{"input", T::text, "", "corpus file"},
        {"vocab-size", T::integer, 512, "target vocabulary size (>= 256)"}},
       bpe_train},
      {"bpe-encode",
       "encode text with a trained vocabulary",
       {{"vocab", T::text, "", "vocabulary file from bpe-train"},
        {"text", T::text, "", "text to encode"},
        {"input", T::text, "", "file to encode"}},
       bpe_encode},
      {"bpe-decode",
       "decode token ids with a trained vocabulary",
       {{"vocab", T::text, "", "vocabulary file from bpe-train"},
        {"tokens", T::text, "", "comma-separated token ids"},
        {"input", T::text, "", "tokens.json written by bpe-encode"}},
       bpe_decode},
      {"capacity",
       "greedy quasi-orthogonal packing curves and random-vector packing statistics",
       {{"epsilons", T::real_list, {0.15, 0.25, 0.3}, "packing tolerances"},
        {"dims", T::count_list, {16, 32, 48, 64}, "ascending dimensions"},
        {"max-attempts", T::integer, static_cast<std::int64_t>(capacity::kDefaultMaxAttempts),
         "consecutive rejections before greedy packing stops"},
        {"packing-n", T::integer, 1000, "random vectors per packing measurement (0 skips)"},
        {"packing-d", T::integer, 256, "dimension of the packing measurement"},
        kTrials,
        kParallel},
       capacity_cmd},
      {"contexts",
       "observables, commutators and Born tables for intertwined contexts",
       {{"angle", T::real, std::numbers::pi / 4, "clockwise rotation of e1, e2 about e3"},
        {"lambdas", T::real_list, {1.0, 2.0, 3.0}, "eigenvalues of the e observable"},
        {"mus", T::real_list, {4.0, 5.0, 6.0}, "eigenvalues of the f observable"},
        {"grid", T::real_list, {1.0, 2.0}, "values swept for lambda1, lambda2, mu1, mu2"},
        {"noise", T::real, 0.05, "perturbation length applied to v(bank)"}},
       contexts_cmd},
      {"uattention",
       "run a unitary circuit with a terminal measurement and histogram the outcomes",
       {{"circuit", T::text, "", "circuit JSON (empty: built-in 3-d demo)"},
        {"state", T::integer, 0, "input basis state"},
        {"shots", T::integer, 10000, "measurements"}},
       uattention_cmd},
      {"floatlab",
       "reduction-order discrepancies under varying batch sizes",
       {{"requests", T::integer, 8, "requests in the corpus"},
        {"length", T::integer, 1000, "values per request"},
        {"batch-sizes", T::count_list, {1, 2, 7, 64}, "batch sizes to compare"},
        {"spread", T::real, 12.0, "decades of magnitude spread in the corpus"},
        {"fixed-chunk", T::integer, 32, "chunk size in deterministic mode"},
        {"precision", T::text, "float64", "float32 or float64"}},
       floatlab_cmd},
  };
  return all;
}

}  // namespace lmlab::cli
