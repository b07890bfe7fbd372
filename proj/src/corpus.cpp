#include "nestbench/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "nestbench/error.hpp"
#include "nestbench/evaluator.hpp"

namespace nestbench {

namespace {

constexpr std::string_view kAggregationTemplate =
    "Role\n"
    "You are an expert editor specializing in multi-document synthesis. Read multiple input "
    "texts and produce one concise, information-dense summary that merges overlapping content, "
    "resolves contradictions when possible, and preserves key facts.\n"
    "\n"
    "Guide for Inputs\n"
    "DOCS: [A list/array of documents (plain text). Each item may be a paragraph, article, or "
    "note.]\n"
    "\n"
    "Rules\n"
    "1. Aggregation: Merge redundant points; group related ideas; eliminate repetition.\n"
    "2. Compression: Prefer shorter phrasing and high signal-to-noise ratio; avoid filler, "
    "hedging, and rhetorical questions.\n"
    "3. Faithfulness: Do not invent facts. Only use information present in the inputs. If "
    "sources disagree, briefly note the disagreement.\n"
    "4. Clarity & Flow: Use precise vocabulary, active voice, and logical order (problem → "
    "evidence → implications or theme → key points → takeaway).\n"
    "5. Style: Neutral, objective, and professional. Avoid bullet lists unless the content "
    "clearly benefits from this format.\n"
    "6. Language: Use the same language as the source DOCS for output.\n"
    "7. Length: Generate at least {MIN_WORDS} words.\n"
    "\n"
    "DOCS\n";

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

bool is_index(const std::string& seg) {
  return !seg.empty() && std::all_of(seg.begin(), seg.end(), [](unsigned char c) { return std::isdigit(c); });
}

struct Resolved {
  std::string path;
  const nlohmann::json* value;
};

// Every concrete location matching `segs`; locations that do not exist come
// back with a null value so the caller can report them.
void resolve(const nlohmann::json& v, const std::vector<std::string>& segs, std::size_t i,
             const std::string& path, std::vector<Resolved>& out) {
  if (i == segs.size()) {
    out.push_back({path, &v});
    return;
  }
  const auto& seg = segs[i];
  auto next_path = [&](const std::string& s) { return path.empty() ? s : path + "." + s; };
  if (seg == "*") {
    if (!v.is_array() || v.empty()) {
      out.push_back({next_path(seg), nullptr});
      return;
    }
    for (std::size_t k = 0; k < v.size(); ++k) resolve(v[k], segs, i + 1, next_path(std::to_string(k)), out);
    return;
  }
  if (v.is_array() && is_index(seg)) {
    const std::size_t k = std::stoul(seg);
    if (k < v.size()) {
      resolve(v[k], segs, i + 1, next_path(seg), out);
      return;
    }
  } else if (v.is_object()) {
    auto it = v.find(seg);
    if (it != v.end()) {
      resolve(*it, segs, i + 1, next_path(seg), out);
      return;
    }
  }
  out.push_back({next_path(seg), nullptr});
}

bool schema_resolves(const SchemaNode* n, const std::vector<std::string>& segs) {
  for (const auto& seg : segs) {
    if (n == nullptr) return false;
    if (n->type == SchemaType::Array && (seg == "*" || is_index(seg))) {
      n = n->items.get();
    } else if (n->type == SchemaType::Object) {
      n = n->property(seg);
    } else {
      return false;
    }
  }
  return n != nullptr;
}

void ground_walk(const nlohmann::json& v, const std::string& path, std::string_view source,
                 const std::vector<double>& numbers, std::vector<std::string>& missing) {
  auto child_path = [&](const std::string& s) { return path.empty() ? s : path + "." + s; };
  if (v.is_object()) {
    for (const auto& [k, c] : v.items()) ground_walk(c, child_path(k), source, numbers, missing);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      ground_walk(v[i], child_path(std::to_string(i)), source, numbers, missing);
    }
  } else if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (!s.empty() && source.find(s) == std::string_view::npos) missing.push_back(path);
  } else if (v.is_number()) {
    const double x = std::abs(v.get<double>());
    if (std::find(numbers.begin(), numbers.end(), x) == numbers.end()) missing.push_back(path);
  }
  // booleans and nulls are not grounded
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return canonical_number(v);
  return v.dump();
}

// Reduces x modulo 2^61 - 1.
constexpr std::uint64_t kMersenne61 = (1ULL << 61) - 1;

std::uint64_t mod_mersenne(unsigned __int128 x) {
  std::uint64_t lo = static_cast<std::uint64_t>(x & kMersenne61);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  while (r >= kMersenne61) r -= kMersenne61;
  return r;
}

}  // namespace

void AggregationJob::validate() const {
  if (docs.empty()) throw ArgumentError("aggregation job has no documents");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].empty()) throw ArgumentError("aggregation document " + std::to_string(i + 1) + " is empty");
  }
  if (min_words == 0) throw ArgumentError("aggregation word floor must be positive");
}

std::string detect_script_language(std::string_view text) {
  std::size_t latin = 0, han = 0, kana = 0, hangul = 0, cyrillic = 0, arabic = 0;
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = text[i];
    char32_t cp = 0;
    int len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      cp = c & 0x07;
      len = 4;
    }
    for (int k = 1; k < len && i + k < text.size(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    }
    i += len;
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) ++latin;
    else if (cp >= 0x4E00 && cp <= 0x9FFF) ++han;
    else if (cp >= 0x3040 && cp <= 0x30FF) ++kana;
    else if (cp >= 0xAC00 && cp <= 0xD7AF) ++hangul;
    else if (cp >= 0x0400 && cp <= 0x04FF) ++cyrillic;
    else if (cp >= 0x0600 && cp <= 0x06FF) ++arabic;
  }
  if (kana > 0 && kana + han >= latin) return "ja";
  const std::pair<std::size_t, const char*> counts[] = {
      {latin, "en"}, {han, "zh"}, {hangul, "ko"}, {cyrillic, "ru"}, {arabic, "ar"}};
  const auto* best = std::max_element(std::begin(counts), std::end(counts),
                                      [](const auto& a, const auto& b) { return a.first < b.first; });
  return best->first == 0 ? "en" : best->second;
}

std::string build_aggregation_prompt(const AggregationJob& job) {
  job.validate();
  std::string prompt(kAggregationTemplate);
  const std::string marker = "{MIN_WORDS}";
  prompt.replace(prompt.find(marker), marker.size(), std::to_string(job.min_words));
  for (std::size_t i = 0; i < job.docs.size(); ++i) {
    prompt += "[DOC " + std::to_string(i + 1) + "]\n";
    prompt += job.docs[i];
    prompt += "\n\n";
  }
  return prompt;
}

ChatCompletionClient::ChatCompletionClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.url.empty()) throw ConfigError("completion endpoint url is not configured");
}

std::string ChatCompletionClient::complete(const std::string& prompt) {
  nlohmann::json body = {{"model", cfg_.model},
                         {"temperature", cfg_.temperature},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  const auto resp = post_json_with_retry(cfg_, body);
  try {
    return resp.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw EndpointError("completion response lacks choices[0].message.content", false, 1);
  }
}

std::string EchoCompletionStub::complete(const std::string& prompt) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(prompt)));
  return "stub completion " + std::string(hex) + " (" + std::to_string(word_count(prompt)) +
         " prompt words)";
}

std::vector<std::string> complete_all(CompletionClient& client,
                                      const std::vector<std::string>& prompts, int max_in_flight) {
  if (max_in_flight < 1) throw ArgumentError("max_in_flight must be at least 1");
  std::vector<std::string> out(prompts.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size() && !failed; i = next++) {
      try {
        out[i] = client.complete(prompts[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), prompts.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

LengthCheck length_check(std::string_view text, std::size_t min_words) {
  LengthCheck r;
  r.words = word_count(text);
  r.pass = r.words >= min_words;
  return r;
}

std::vector<double> numeric_literals(std::string_view text) {
  static const std::regex number(R"(\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)");
  std::vector<double> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
    std::string lit = it->str();
    lit.erase(std::remove(lit.begin(), lit.end(), ','), lit.end());
    double v = 0;
    auto res = std::from_chars(lit.data(), lit.data() + lit.size(), v);
    if (res.ec == std::errc()) out.push_back(v);
  }
  return out;
}

std::vector<std::string> grounding_probe(const nlohmann::json& gold, std::string_view source) {
  std::vector<std::string> missing;
  ground_walk(gold, "", source, numeric_literals(source), missing);
  return missing;
}

ConstraintRule ConstraintRule::from_json(const nlohmann::json& j) {
  ConstraintRule r;
  if (!j.is_object() || !j.contains("kind") || !j.contains("path")) {
    throw ConfigError("constraint rule needs 'kind' and 'path'");
  }
  const auto kind = j["kind"].get<std::string>();
  r.target = j["path"].get<std::string>();
  if (r.target.empty()) throw ConfigError("constraint rule has an empty path");
  if (kind == "range") {
    r.kind = Kind::Range;
    if (!j.contains("min") || !j.contains("max")) throw ConfigError("range rule needs min and max");
    r.min = j["min"].get<double>();
    r.max = j["max"].get<double>();
    if (r.min > r.max) throw ConfigError("range rule on " + r.target + " has min > max");
  } else if (kind == "equality") {
    r.kind = Kind::Equality;
    r.peer = j.value("peer", std::string{});
    if (r.peer.empty()) throw ConfigError("equality rule on " + r.target + " needs a peer path");
  } else if (kind == "regex") {
    r.kind = Kind::Regex;
    r.pattern = j.value("pattern", std::string{});
    try {
      r.compiled = std::make_shared<const std::regex>(r.pattern);
    } catch (const std::regex_error& e) {
      throw ConfigError("regex rule on " + r.target + " does not compile: " + e.what());
    }
  } else {
    throw ConfigError("unknown constraint kind '" + kind + "'");
  }
  return r;
}

nlohmann::json ConstraintRule::to_json() const {
  switch (kind) {
    case Kind::Range:
      return {{"kind", "range"}, {"path", target}, {"min", min}, {"max", max}};
    case Kind::Equality:
      return {{"kind", "equality"}, {"path", target}, {"peer", peer}};
    case Kind::Regex:
      return {{"kind", "regex"}, {"path", target}, {"pattern", pattern}};
  }
  return {};
}

std::map<std::string, std::vector<ConstraintRule>> load_constraint_rules(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("rules file must map domains to rule lists");
  std::map<std::string, std::vector<ConstraintRule>> out;
  for (const auto& [domain, rules] : doc.items()) {
    if (!rules.is_array()) throw ConfigError("rules for domain '" + domain + "' must be a list");
    auto& slot = out[domain];
    for (const auto& r : rules) slot.push_back(ConstraintRule::from_json(r));
  }
  return out;
}

std::vector<std::string> unresolved_rule_paths(const std::vector<ConstraintRule>& rules,
                                               const SchemaDoc& schema) {
  std::vector<std::string> out;
  for (const auto& r : rules) {
    if (!schema_resolves(&schema.root, split_path(r.target))) out.push_back(r.target);
    if (r.kind == ConstraintRule::Kind::Equality && !schema_resolves(&schema.root, split_path(r.peer))) {
      out.push_back(r.peer);
    }
  }
  return out;
}

std::vector<ConstraintViolation> constraint_check(const nlohmann::json& value,
                                                  const std::vector<ConstraintRule>& rules) {
  std::vector<ConstraintViolation> out;
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    const auto& rule = rules[ri];
    std::vector<Resolved> targets;
    resolve(value, split_path(rule.target), 0, "", targets);
    bool missing = false;
    for (const auto& t : targets) {
      if (t.value == nullptr) {
        out.push_back({ri, t.path, "target missing"});
        missing = true;
      }
    }
    if (missing) continue;
    switch (rule.kind) {
      case ConstraintRule::Kind::Range:
        for (const auto& t : targets) {
          if (!t.value->is_number()) {
            out.push_back({ri, t.path, "range target is not a number"});
            continue;
          }
          const double x = t.value->get<double>();
          if (x < rule.min || x > rule.max) {
            std::ostringstream msg;
            msg << "value " << canonical_number(*t.value) << " outside [" << rule.min << ", "
                << rule.max << "]";
            out.push_back({ri, t.path, msg.str()});
          }
        }
        break;
      case ConstraintRule::Kind::Equality: {
        std::vector<Resolved> peers;
        resolve(value, split_path(rule.peer), 0, "", peers);
        if (std::any_of(peers.begin(), peers.end(), [](const Resolved& p) { return p.value == nullptr; })) {
          out.push_back({ri, rule.peer, "peer missing"});
          break;
        }
        if (peers.size() != targets.size()) {
          out.push_back({ri, rule.target, "target and peer resolve to different counts"});
          break;
        }
        for (std::size_t k = 0; k < targets.size(); ++k) {
          if (!deep_equal(*targets[k].value, *peers[k].value)) {
            out.push_back({ri, targets[k].path, "differs from " + peers[k].path});
          }
        }
        break;
      }
      case ConstraintRule::Kind::Regex:
        for (const auto& t : targets) {
          if (t.value->is_object() || t.value->is_array()) {
            out.push_back({ri, t.path, "regex target is not a scalar"});
            continue;
          }
          if (!std::regex_match(scalar_text(*t.value), *rule.compiled)) {
            out.push_back({ri, t.path, "does not match /" + rule.pattern + "/"});
          }
        }
        break;
    }
  }
  return out;
}

std::set<std::uint64_t> word_shingles(std::string_view text, int n) {
  if (n < 1) throw ArgumentError("shingle size must be at least 1");
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  std::set<std::uint64_t> out;
  if (words.empty()) return out;
  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(n), words.size());
  for (std::size_t i = 0; i + width <= words.size(); ++i) {
    std::string joined = words[i];
    for (std::size_t k = 1; k < width; ++k) {
      joined.push_back(' ');
      joined += words[i + k];
    }
    out.insert(fnv1a64(joined));
  }
  return out;
}

double exact_jaccard(const std::set<std::uint64_t>& a, const std::set<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (auto x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

MinHasher::MinHasher(int num_hashes, std::uint64_t seed) {
  if (num_hashes < 1) throw ArgumentError("MinHash needs at least one hash function");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick_a(1, kMersenne61 - 1);
  std::uniform_int_distribution<std::uint64_t> pick_b(0, kMersenne61 - 1);
  for (int i = 0; i < num_hashes; ++i) {
    a_.push_back(pick_a(rng));
    b_.push_back(pick_b(rng));
  }
}

std::vector<std::uint64_t> MinHasher::signature(const std::set<std::uint64_t>& shingles) const {
  std::vector<std::uint64_t> sig(a_.size(), kMersenne61);
  for (auto s : shingles) {
    const std::uint64_t x = mod_mersenne(s);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const auto h = mod_mersenne(static_cast<unsigned __int128>(a_[i]) * x + b_[i]);
      sig[i] = std::min(sig[i], h);
    }
  }
  return sig;
}

double MinHasher::estimate(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size() || a.empty()) throw ArgumentError("MinHash signatures differ in length");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // kMersenne61 marks an empty set; two empty sets share nothing.
    if (a[i] == b[i] && a[i] != kMersenne61) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(a.size());
}

void LeakageOptions::validate() const {
  if (shingle_n < 1) throw ArgumentError("leakage shingle_n must be at least 1");
  if (num_hashes < 16) throw ArgumentError("leakage num_hashes must be at least 16");
  if (threshold < 0 || threshold > 1) throw ArgumentError("leakage threshold must lie in [0, 1]");
}

LeakageOptions LeakageOptions::from_json(const nlohmann::json& j) {
  LeakageOptions o;
  o.shingle_n = j.value("shingle_n", o.shingle_n);
  o.num_hashes = j.value("num_hashes", o.num_hashes);
  o.threshold = j.value("threshold", o.threshold);
  o.seed = j.value("seed", o.seed);
  o.exact_limit = j.value("exact_limit", o.exact_limit);
  o.validate();
  return o;
}

nlohmann::json LeakageOptions::to_json() const {
  return {{"shingle_n", shingle_n}, {"num_hashes", num_hashes}, {"threshold", threshold},
          {"seed", seed},           {"exact_limit", exact_limit}};
}

std::vector<LeakageFlag> leakage_scan(std::string_view text, const std::vector<std::string>& corpus,
                                      const LeakageOptions& options) {
  options.validate();
  const MinHasher hasher(options.num_hashes, options.seed);
  const auto mine = word_shingles(text, options.shingle_n);
  const auto my_sig = hasher.signature(mine);
  std::vector<LeakageFlag> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto theirs = word_shingles(corpus[i], options.shingle_n);
    LeakageFlag f;
    f.corpus_index = i;
    f.estimate = MinHasher::estimate(my_sig, hasher.signature(theirs));
    if (mine.size() <= options.exact_limit && theirs.size() <= options.exact_limit) {
      f.exact = exact_jaccard(mine, theirs);
    }
    f.flagged = f.estimate >= options.threshold;
    out.push_back(f);
  }
  return out;
}

}  // namespace nestbench
