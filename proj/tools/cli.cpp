#include "cli.hpp"

#include <sys/stat.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pvmark/circuits.hpp"
#include "pvmark/error.hpp"
#include "pvmark/folding.hpp"
#include "pvmark/hash_stats.hpp"
#include "pvmark/json_io.hpp"
#include "pvmark/rng.hpp"

namespace pvmark::cli {

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;

// ------------------------------------------------------------ parameters

struct ParamFlags {
  std::string config;
  std::string scheme, hash;
  std::optional<double> gamma, delta;
  std::optional<unsigned> psi, xi, depth, n_hat, m_hat;
  std::optional<uint64_t> vocab;
  bool unfused = false;
};

void add_param_flags(CLI::App* app, ParamFlags& f) {
  app->add_option("--config", f.config, "JSON config file (unknown keys are rejected)");
  app->add_option("--scheme", f.scheme, "kgw | synthid | segment");
  app->add_option("--hash", f.hash, "poseidon | mimc");
  app->add_option("--gamma", f.gamma, "green-list fraction");
  app->add_option("--delta", f.delta, "logit bias");
  app->add_option("--psi", f.psi, "context width");
  app->add_option("--xi", f.xi, "g-values scored per token (synthid)");
  app->add_option("--tourney-depth", f.depth, "tournament levels (synthid)");
  app->add_option("--n-hat", f.n_hat, "message positions (segment)");
  app->add_option("--m-hat", f.m_hat, "bits per position (segment)");
  app->add_option("--vocab", f.vocab, "vocabulary size");
  app->add_flag("--unfused", f.unfused, "KGW: two two-to-one hashes instead of one fused hash");
}

struct Config {
  WatermarkParams params;
  std::optional<size_t> n_t;
  std::optional<uint64_t> seed;
};

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{
      "format", "scheme", "hash", "gamma", "psi", "delta", "xi", "tourney_depth",
      "n_hat", "m_hat", "vocab_size", "fused", "n_t", "seed", "key", "text", "proof",
      "commitment", "out"};
  return keys;
}

Config load_config(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (config_keys().count(k) == 0) {
      throw Error(ErrorCode::kParseError, "unknown config key '" + k + "'");
    }
  }
  Config c;
  const Scheme scheme = j.contains("scheme") ? parse_scheme(require_string(j, "scheme")) : Scheme::kKgw;
  c.params = WatermarkParams::defaults(scheme);
  auto num = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number()) throw Error(ErrorCode::kParseError, std::string(key) + " must be a number");
    return j[key].get<double>();
  };
  if (j.contains("hash")) c.params.hash = parse_hash_kind(require_string(j, "hash"));
  if (auto v = num("gamma")) c.params.gamma = *v;
  if (auto v = num("delta")) c.params.delta = *v;
  if (j.contains("psi")) c.params.psi = static_cast<unsigned>(require_u64(j, "psi"));
  if (j.contains("xi")) c.params.xi = static_cast<unsigned>(require_u64(j, "xi"));
  if (j.contains("tourney_depth")) c.params.tourney_depth = static_cast<unsigned>(require_u64(j, "tourney_depth"));
  if (j.contains("n_hat")) c.params.n_hat = static_cast<unsigned>(require_u64(j, "n_hat"));
  if (j.contains("m_hat")) c.params.m_hat = static_cast<unsigned>(require_u64(j, "m_hat"));
  if (j.contains("vocab_size")) c.params.vocab_size = require_u64(j, "vocab_size");
  if (j.contains("fused")) c.params.fused = require_bool(j, "fused");
  if (j.contains("n_t")) c.n_t = require_u64(j, "n_t");
  if (j.contains("seed")) c.seed = require_u64(j, "seed");
  return c;
}

Config resolve(const ParamFlags& f) {
  Config c;
  if (!f.config.empty()) {
    c = load_config(f.config);
  } else {
    c.params = WatermarkParams::defaults(f.scheme.empty() ? Scheme::kKgw : parse_scheme(f.scheme));
  }
  if (!f.scheme.empty()) {
    const Scheme s = parse_scheme(f.scheme);
    if (s != c.params.scheme) {
      const auto keep = c.params;
      c.params = WatermarkParams::defaults(s);
      c.params.hash = keep.hash;
      c.params.vocab_size = keep.vocab_size;
    }
  }
  auto& p = c.params;
  if (!f.hash.empty()) p.hash = parse_hash_kind(f.hash);
  if (f.gamma) p.gamma = *f.gamma;
  if (f.delta) p.delta = *f.delta;
  if (f.psi) p.psi = *f.psi;
  if (f.xi) p.xi = *f.xi;
  if (f.depth) p.tourney_depth = *f.depth;
  if (f.n_hat) p.n_hat = *f.n_hat;
  if (f.m_hat) p.m_hat = *f.m_hat;
  if (f.vocab) p.vocab_size = *f.vocab;
  if (f.unfused) p.fused = false;
  if (p.scheme != Scheme::kKgw) p.fused = false;
  p.validate();
  return c;
}

// ------------------------------------------------------------ files

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(out, j);
  }
}

SecretKey read_key(const std::string& path) {
  const json j = read_json_file(path);
  require_format(j);
  if (require_string(j, "kind") != "key") throw Error(ErrorCode::kParseError, path + " is not a key file");
  SecretKey k;
  k.sk = fe_from_json(require(j, "sk"));
  k.s_h = fe_from_json(require(j, "s_h"));
  return k;
}

json key_json(const SecretKey& k) {
  return {{"format", kFormatTag}, {"kind", "key"}, {"sk", fe_to_json(k.sk)}, {"s_h", fe_to_json(k.s_h)}};
}

json commitment_json(const SecretKey& k, const WatermarkParams& p) {
  json j{{"format", kFormatTag},
         {"kind", "commitment"},
         {"upsilon", fe_to_json(setup_commit(k.sk))},
         {"hash_kind", hash_kind_name(HashKind::kPoseidon)},
         {"segment", nullptr}};
  if (p.scheme == Scheme::kSegment) {
    const auto map = TokenPositionMap::derive(k.sk, p.vocab_size, p.n_hat);
    const auto tree = MerkleTree::build(map, k.sk, p.hash);
    j["segment"] = {{"root", fe_to_json(tree.root())},
                    {"hash", hash_kind_name(p.hash)},
                    {"vocab_size", p.vocab_size},
                    {"n_hat", p.n_hat}};
  }
  return j;
}

TokenSeq read_text(const std::string& path) {
  const json j = read_json_file(path);
  require_format(j);
  if (require_string(j, "kind") != "text") throw Error(ErrorCode::kParseError, path + " is not a text file");
  TokenSeq t;
  for (uint64_t v : require_u64_array(j, "tokens")) {
    if (v > UINT32_MAX) throw Error(ErrorCode::kParseError, "token out of range");
    t.push_back(static_cast<uint32_t>(v));
  }
  return t;
}

std::vector<uint32_t> parse_list(const std::string& s) {
  std::vector<uint32_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    const unsigned long v = std::stoul(item, &used);
    if (used != item.size() || v > UINT32_MAX) {
      throw Error(ErrorCode::kParseError, "bad list entry '" + item + "'");
    }
    out.push_back(static_cast<uint32_t>(v));
  }
  return out;
}

json report_json(const DetectionReport& r) {
  json j{{"format", kFormatTag},
         {"kind", "report"},
         {"scheme", scheme_name(r.scheme)},
         {"n_scored", r.n_scored},
         {"score", r.score}};
  switch (r.scheme) {
    case Scheme::kKgw: j["green_count"] = r.green_count; break;
    case Scheme::kSynthId: j["s_g"] = r.s_g; break;
    case Scheme::kSegment:
      j["count"] = r.count;
      j["decoded_msg"] = r.decoded_msg;
      break;
  }
  return j;
}

struct Detection {
  DetectionReport report;
  DetectionStatement statement;
  SegmentOpenings openings;
};

Detection run_detection(const TokenSeq& tokens, const WatermarkParams& p, const SecretKey& key) {
  Detection d;
  const FieldElement upsilon = setup_commit(key.sk);
  if (p.scheme == Scheme::kSegment) {
    const auto map = TokenPositionMap::derive(key.sk, p.vocab_size, p.n_hat);
    const auto tree = MerkleTree::build(map, key.sk, p.hash);
    d.report = detect_segment(tokens, p, key, map);
    d.statement = DetectionStatement::from_report(p, tokens, d.report, upsilon, tree.root());
    d.openings = segment_openings(tree, map, tokens);
  } else {
    d.report = detect(tokens, p, key);
    d.statement = DetectionStatement::from_report(p, tokens, d.report, upsilon);
  }
  return d;
}

double gamma_of(const FieldElement& threshold) {
  const U256 t = threshold.to_u256();
  const U256& p = FieldElement::modulus();
  const unsigned shift = p.bit_length() - 62;
  return static_cast<double>(t.shr(shift).extract(0, 62)) / static_cast<double>(p.shr(shift).extract(0, 62));
}

// Score and message a verifier can recompute from the statement alone.
json public_summary(const DetectionStatement& s) {
  json j{{"scheme", scheme_name(s.scheme)}, {"n_scored", s.scored_tokens()}};
  const double n = static_cast<double>(s.scored_tokens());
  switch (s.scheme) {
    case Scheme::kKgw:
      j["green_count"] = s.claimed_count;
      j["z_score"] = kgw_z_score(s.claimed_count, s.scored_tokens(), gamma_of(s.threshold));
      break;
    case Scheme::kSynthId:
      j["s_g"] = s.claimed_count;
      j["score"] = static_cast<double>(s.claimed_count) / (n * s.xi);
      break;
    case Scheme::kSegment: {
      std::vector<uint32_t> msg;
      uint64_t total = 0;
      for (const auto& row : s.count_matrix) {
        const auto best = std::max_element(row.begin(), row.end());
        msg.push_back(static_cast<uint32_t>(best - row.begin()));
        total += *best;
      }
      j["decoded_msg"] = msg;
      j["z_score"] = kgw_z_score(total, s.scored_tokens(), gamma_of(s.threshold));
      break;
    }
  }
  return j;
}

FieldElement session_blind(const SecretKey& key, std::optional<uint64_t> seed) {
  FieldElement nonce;
  if (seed) {
    auto rng = derived_rng(*seed, 0x7348);
    nonce = random_field_element(rng);
  } else {
    nonce = secure_random_field_element();
  }
  return hash2(HashKind::kPoseidon, key.s_h, nonce);
}

// ------------------------------------------------------------ commands

int cmd_keygen(const std::string& out_dir, std::optional<uint64_t> seed, const ParamFlags& pf) {
  const Config cfg = resolve(pf);
  namespace fs = std::filesystem;
  if (!fs::is_directory(out_dir)) {
    throw Error(ErrorCode::kIoError, "output directory '" + out_dir + "' does not exist");
  }
  const SecretKey key = seed ? SecretKey::from_seed(*seed) : SecretKey::generate();
  const std::string key_path = (fs::path(out_dir) / "key.json").string();
  write_json_file(key_path, key_json(key));
  ::chmod(key_path.c_str(), S_IRUSR | S_IWUSR);
  write_json_file((fs::path(out_dir) / "commitment.json").string(), commitment_json(key, cfg.params));
  std::cout << "wrote " << key_path << " (mode 0600) and commitment.json\n";
  return kExitOk;
}

int cmd_commit(const std::string& key_path, const std::string& out, const ParamFlags& pf) {
  emit(commitment_json(read_key(key_path), resolve(pf).params), out);
  return kExitOk;
}

int cmd_embed(const std::string& key_path, const ParamFlags& pf, size_t n, uint64_t seed,
              const std::string& prompt_s, const std::string& msg_s, bool plain, double spread,
              const std::string& out) {
  const auto cfg = resolve(pf);
  const auto& p = cfg.params;
  const uint64_t s = cfg.seed.value_or(seed);
  const MockLm lm(p.vocab_size, s, spread);
  TokenSeq prompt = parse_list(prompt_s);
  if (prompt.empty()) {
    auto rng = derived_rng(s, 1);
    prompt.resize(std::max(1u, p.psi));
    for (auto& t : prompt) t = static_cast<uint32_t>(rng() % p.vocab_size);
  }
  TokenSeq text;
  json extra = json::object();
  if (plain) {
    text = generate_plain(prompt, n, lm, s);
  } else {
    const SecretKey key = read_key(key_path);
    switch (p.scheme) {
      case Scheme::kKgw: text = embed_kgw(prompt, n, p, key, lm, s); break;
      case Scheme::kSynthId: text = embed_synthid(prompt, n, p, key, lm, s); break;
      case Scheme::kSegment: {
        std::vector<uint32_t> msg = parse_list(msg_s);
        if (msg.empty()) {
          auto rng = derived_rng(s, 2);
          msg.resize(p.n_hat);
          for (auto& m : msg) m = static_cast<uint32_t>(rng() % p.hypotheses());
        }
        const auto map = TokenPositionMap::derive(key.sk, p.vocab_size, p.n_hat);
        text = embed_segment(prompt, n, p, key, lm, s, msg, map);
        extra["msg"] = msg;
        break;
      }
    }
  }
  json j{{"format", kFormatTag},
         {"kind", "text"},
         {"scheme", scheme_name(p.scheme)},
         {"watermarked", !plain},
         {"prompt_len", prompt.size()},
         {"tokens", text}};
  if (!extra.empty()) j["embedded"] = extra;
  emit(j, out);
  return kExitOk;
}

int cmd_detect(const std::string& key_path, const std::string& text_path, const ParamFlags& pf,
               const std::string& out) {
  const auto cfg = resolve(pf);
  const auto d = run_detection(read_text(text_path), cfg.params, read_key(key_path));
  emit(report_json(d.report), out);
  return kExitOk;
}

int cmd_prove(const std::string& key_path, const std::string& text_path, const ParamFlags& pf,
              const std::string& mode, std::optional<size_t> nt, std::optional<uint64_t> seed,
              const std::string& range, const std::string& out) {
  const auto cfg = resolve(pf);
  const SecretKey key = read_key(key_path);
  const auto d = run_detection(read_text(text_path), cfg.params, key);
  const SegmentOpenings* openings = cfg.params.scheme == Scheme::kSegment ? &d.openings : nullptr;
  json proof;
  if (mode == "monolithic") {
    proof = to_json(prove_monolithic(d.statement, key, openings, parse_range_mode(range)));
  } else if (mode == "ivc") {
    const size_t n_t = nt.value_or(cfg.n_t.value_or(25));
    const auto blind = session_blind(key, seed ? seed : cfg.seed);
    proof = to_json(ivc_prove(d.statement, key, blind, n_t, openings));
  } else {
    throw Error(ErrorCode::kInvalidParams, "mode must be monolithic or ivc");
  }
  emit(proof, out);
  std::cerr << "proved " << public_summary(d.statement).dump() << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& proof_path, const std::string& commitment_path,
               const std::string& text_path) {
  const json commitment = read_json_file(commitment_path);
  require_format(commitment);
  if (require_string(commitment, "kind") != "commitment") {
    throw Error(ErrorCode::kParseError, commitment_path + " is not a commitment file");
  }
  const FieldElement upsilon = fe_from_json(require(commitment, "upsilon"));
  std::optional<TokenSeq> text;
  if (!text_path.empty()) text = read_text(text_path);
  if (!std::filesystem::exists(proof_path)) {
    throw Error(ErrorCode::kIoError, "cannot open " + proof_path);
  }

  auto reject = [](const std::string& why) {
    std::cout << "REJECT: " << why << "\n";
    return kExitReject;
  };
  try {
    const json pj = read_json_file(proof_path);
    const std::string kind = require_string(pj, "kind");
    DetectionStatement stmt;
    bool ok = false;
    if (kind == "monolithic") {
      const auto proof = monolithic_proof_from_json(pj);
      stmt = proof.statement;
      ok = verify_monolithic(proof);
    } else if (kind == "ivc") {
      const auto proof = ivc_proof_from_json(pj);
      stmt = proof.statement;
      ok = ivc_verify(proof, stmt);
    } else {
      return reject("unknown proof kind");
    }
    if (stmt.upsilon != upsilon) return reject("statement commitment differs from the key commitment");
    if (stmt.scheme == Scheme::kSegment) {
      const json& seg = require(commitment, "segment");
      if (seg.is_null() || fe_from_json(require(seg, "root")) != stmt.root ||
          require_u64(seg, "vocab_size") != stmt.vocab_size ||
          require_u64(seg, "n_hat") != stmt.n_hat ||
          parse_hash_kind(require_string(seg, "hash")) != stmt.hash) {
        return reject("Merkle root or map shape differs from the commitment");
      }
    }
    if (text && *text != stmt.tokens) return reject("proof is about a different text");
    if (!ok) return reject("proof does not verify");
    std::cout << "ACCEPT " << public_summary(stmt).dump() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return reject(e.what());
  }
}

int cmd_hashtest(const std::string& kind, uint64_t iters, uint64_t trials, uint64_t vocab,
                 uint64_t seed, const std::string& out) {
  BatchPrf prf;
  if (kind == "sha256-mod-p") {
    prf = sha256_mod_p_prf();
  } else {
    prf = hash_batch_prf(parse_hash_kind(kind));
  }
  json j{{"format", kFormatTag}, {"kind", kind}};
  if (iters > 0) {
    const auto c = chi_square_uniformity(prf, iters, seed, kChiSquareBins, vocab);
    j["chi2_mean"] = c.mean_chi2;
    j["chi2_std"] = c.stddev_chi2;
    j["pass_rate"] = c.pass_rate;
    j["iterations"] = c.iterations;
    j["bins"] = c.bins;
    j["vocab_size"] = c.vocab_size;
    j["threshold"] = c.threshold;
  }
  if (trials > 0) {
    const auto a = avalanche(prf, trials, seed);
    j["avalanche"] = a.coefficient;
    j["avalanche_trials"] = a.trials;
  }
  emit(j, out);
  return kExitOk;
}

int cmd_sweep(const std::string& key_path, const std::string& text_path, const ParamFlags& pf,
              const std::string& cand_s, unsigned repeats, const std::string& out) {
  const auto cfg = resolve(pf);
  const SecretKey key = read_key(key_path);
  const auto d = run_detection(read_text(text_path), cfg.params, key);
  std::vector<size_t> cands;
  if (cand_s.empty()) {
    const size_t n = d.statement.scored_tokens();
    for (size_t k = 1; k <= n; ++k) {
      if (n % k == 0) cands.push_back(k);
    }
  } else {
    for (uint32_t v : parse_list(cand_s)) cands.push_back(v);
  }
  const auto rows = sweep_nt(d.statement, key, cands, repeats);
  json table = json::array();
  std::cerr << "   n_t  n_f   rows_step   setup_s   prove_s  verify_s   total_s\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%6zu %4zu %11zu %9.4f %9.4f %9.4f %9.4f\n", r.n_t, r.n_f,
                  r.rows_step, r.setup_s, r.prove_s, r.verify_s, r.total_s());
    std::cerr << line;
    table.push_back({{"n_t", r.n_t},
                     {"n_f", r.n_f},
                     {"rows_final", r.rows_step},
                     {"rows_fold", r.rows_folded},
                     {"setup_s", r.setup_s},
                     {"prove_s", r.prove_s},
                     {"verify_s", r.verify_s},
                     {"total_s", r.total_s()}});
  }
  emit({{"format", kFormatTag}, {"kind", "sweep"}, {"rows", std::move(table)}}, out);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"pvmark: publicly verifiable LLM watermark detection"};
  app.require_subcommand(1);

  std::string key, text, out, proof_path, commitment, out_dir, prompt, msg, mode = "monolithic",
                                                                          range = "bitwise",
                                                                          kind = "poseidon",
                                                                          candidates;
  std::optional<uint64_t> seed;
  std::optional<size_t> nt;
  uint64_t embed_seed = 1, iters = 1000, trials = 100000, vocab = kDefaultVocabSize, hseed = 1;
  size_t n_tokens = 200;
  unsigned repeats = 3;
  double spread = 4.0;
  bool plain = false;
  ParamFlags pf;

  auto* keygen = app.add_subcommand("keygen", "generate a secret key and its public commitment");
  keygen->add_option("--out", out_dir, "output directory")->required();
  keygen->add_option("--seed", seed, "derive the key from a seed (reproducible)");
  add_param_flags(keygen, pf);

  auto* commit = app.add_subcommand("commit", "recompute the public commitment of a key");
  commit->add_option("--key", key, "key file")->required();
  commit->add_option("--out", out, "output file (default stdout)");
  add_param_flags(commit, pf);

  auto* embed = app.add_subcommand("embed", "generate watermarked text with the mock language model");
  embed->add_option("--key", key, "key file");
  embed->add_option("--n", n_tokens, "tokens to generate");
  embed->add_option("--seed", embed_seed, "sampling and model seed");
  embed->add_option("--prompt", prompt, "comma-separated prompt tokens");
  embed->add_option("--msg", msg, "comma-separated message digits (segment)");
  embed->add_option("--spread", spread, "mock model logit spread");
  embed->add_flag("--plain", plain, "generate without a watermark");
  embed->add_option("--out", out, "output file (default stdout)");
  add_param_flags(embed, pf);

  auto* detect_cmd = app.add_subcommand("detect", "score a text with the secret key");
  detect_cmd->add_option("--key", key, "key file")->required();
  detect_cmd->add_option("--text", text, "text file")->required();
  detect_cmd->add_option("--out", out, "output file (default stdout)");
  add_param_flags(detect_cmd, pf);

  auto* prove = app.add_subcommand("prove", "prove a detection result");
  prove->add_option("--key", key, "key file")->required();
  prove->add_option("--text", text, "text file")->required();
  prove->add_option("--mode", mode, "monolithic | ivc")->check(CLI::IsMember({"monolithic", "ivc"}));
  prove->add_option("--nt", nt, "tokens per folded chunk (ivc)");
  prove->add_option("--seed", seed, "seed for the accumulator blind (ivc)");
  prove->add_option("--range", range, "bitwise | byte_lookup | byte_vanishing (monolithic)")
      ->check(CLI::IsMember({"bitwise", "byte_lookup", "byte_vanishing"}));
  prove->add_option("--out", out, "output file (default stdout)");
  add_param_flags(prove, pf);

  auto* verify = app.add_subcommand("verify", "verify a proof against a public commitment");
  verify->add_option("--proof", proof_path, "proof file")->required();
  verify->add_option("--commitment", commitment, "commitment file")->required();
  verify->add_option("--text", text, "text the proof must be about");

  auto* hashtest = app.add_subcommand("hashtest", "chi-square and avalanche tests of a hash");
  hashtest->add_option("--kind", kind, "poseidon | mimc | sha256-mod-p")
      ->check(CLI::IsMember({"poseidon", "mimc", "sha256-mod-p"}));
  hashtest->add_option("--iters", iters, "chi-square iterations (0 skips)");
  hashtest->add_option("--trials", trials, "avalanche trials (0 skips)");
  hashtest->add_option("--vocab", vocab, "digests per iteration");
  hashtest->add_option("--seed", hseed, "seed");
  hashtest->add_option("--out", out, "output file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "time the chunk size trade-off of recursive proving");
  sweep->add_option("--key", key, "key file")->required();
  sweep->add_option("--text", text, "text file")->required();
  sweep->add_option("--candidates", candidates, "comma-separated n_t values (default: divisors)");
  sweep->add_option("--repeats", repeats, "runs per candidate (minimum is reported)");
  sweep->add_option("--out", out, "output file (default stdout)");
  add_param_flags(sweep, pf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*keygen) return cmd_keygen(out_dir, seed, pf);
    if (*commit) return cmd_commit(key, out, pf);
    if (*embed) {
      if (key.empty() && !plain) {
        std::cerr << "error: --key is required unless --plain is given\n";
        return kExitUsage;
      }
      return cmd_embed(key, pf, n_tokens, embed_seed, prompt, msg, plain, spread, out);
    }
    if (*detect_cmd) return cmd_detect(key, text, pf, out);
    if (*prove) return cmd_prove(key, text, pf, mode, nt, seed, range, out);
    if (*verify) return cmd_verify(proof_path, commitment, text);
    if (*hashtest) return cmd_hashtest(kind, iters, trials, vocab, hseed, out);
    if (*sweep) return cmd_sweep(key, text, pf, candidates, repeats, out);
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pvmark::cli
