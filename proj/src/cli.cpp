#include "p2f/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "p2f/assets.hpp"
#include "p2f/dataset.hpp"

namespace p2f {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

namespace {

template <class T>
void take(const json& doc, const char* key, T& field) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config: '") + key + "' has the wrong type");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
  static const char* const kKeys[] = {
      "backend", "mock", "scheme", "fabrication", "combination", "directive",
      "decomposition_version", "fabrication_version", "combination_version", "m", "repeats",
      "plan_mode", "alpha", "beta", "refine", "llm_attack_generation", "attacks",
      "completion_hints", "pools", "ratios", "hints", "lambda", "trials", "r", "configs",
      "per_category", "templates", "seed", "corpus", "question", "id", "out", "jobs"};
  if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&](const char* k) { return key == k; }) == std::end(kKeys)) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  RunConfig c;
  if (doc.contains("backend")) {
    const auto& b = doc.at("backend");
    if (!b.is_object()) throw ValidationError("config: 'backend' must be an object");
    for (const auto& [key, value] : b.items()) {
      if (key != "base_url" && key != "model" && key != "temperature" && key != "timeout_ms" &&
          key != "max_retries" && key != "api_key_env") {
        throw ValidationError("config: unknown key 'backend." + key + "'");
      }
    }
    take(b, "base_url", c.backend.base_url);
    take(b, "model", c.backend.model);
    take(b, "temperature", c.backend.temperature);
    long long timeout = c.backend.timeout.count();
    take(b, "timeout_ms", timeout);
    c.backend.timeout = std::chrono::milliseconds(timeout);
    take(b, "max_retries", c.backend.max_retries);
    take(b, "api_key_env", c.backend.api_key_env);
  }
  take(doc, "mock", c.mock);
  take(doc, "scheme", c.scheme);
  take(doc, "fabrication", c.fabrication);
  take(doc, "combination", c.combination);
  take(doc, "directive", c.directive);
  take(doc, "decomposition_version", c.decomposition_version);
  take(doc, "fabrication_version", c.fabrication_version);
  take(doc, "combination_version", c.combination_version);
  take(doc, "m", c.m);
  take(doc, "repeats", c.repeats);
  take(doc, "plan_mode", c.plan_mode);
  take(doc, "alpha", c.alpha);
  take(doc, "beta", c.beta);
  take(doc, "refine", c.refine);
  take(doc, "llm_attack_generation", c.llm_attack_generation);
  take(doc, "attacks", c.attacks);
  take(doc, "completion_hints", c.completion_hints);
  take(doc, "pools", c.pools);
  take(doc, "ratios", c.ratios);
  take(doc, "hints", c.hints);
  if (doc.contains("lambda") && !doc.at("lambda").is_null()) {
    double l = 0.0;
    take(doc, "lambda", l);
    c.lambda = l;
  }
  if (doc.contains("trials") && !doc.at("trials").is_null()) {
    std::size_t t = 0;
    take(doc, "trials", t);
    c.trials = t;
  }
  take(doc, "r", c.r);
  take(doc, "configs", c.configs);
  take(doc, "per_category", c.per_category);
  take(doc, "templates", c.templates);
  take(doc, "seed", c.seed);
  take(doc, "corpus", c.corpus);
  take(doc, "question", c.question);
  take(doc, "id", c.id);
  take(doc, "out", c.out);
  take(doc, "jobs", c.jobs);
  return c;
}

json RunConfig::to_json() const {
  ordered_json j;
  j["backend"] = {{"base_url", backend.base_url},
                  {"model", backend.model},
                  {"temperature", backend.temperature},
                  {"timeout_ms", backend.timeout.count()},
                  {"max_retries", backend.max_retries},
                  {"api_key_env", backend.api_key_env}};
  j["mock"] = mock;
  j["scheme"] = scheme;
  j["fabrication"] = fabrication;
  j["combination"] = combination;
  j["directive"] = directive;
  j["decomposition_version"] = decomposition_version;
  j["fabrication_version"] = fabrication_version;
  j["combination_version"] = combination_version;
  j["m"] = m;
  j["repeats"] = repeats;
  j["plan_mode"] = plan_mode;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["refine"] = refine;
  j["llm_attack_generation"] = llm_attack_generation;
  j["attacks"] = attacks;
  j["completion_hints"] = completion_hints;
  j["pools"] = pools;
  j["ratios"] = ratios;
  j["hints"] = hints;
  j["lambda"] = lambda ? json(*lambda) : json(nullptr);
  j["trials"] = trials ? json(*trials) : json(nullptr);
  j["r"] = r;
  j["configs"] = configs;
  j["per_category"] = per_category;
  j["templates"] = templates;
  j["seed"] = seed;
  j["corpus"] = corpus;
  j["question"] = question;
  j["id"] = id;
  j["out"] = out;
  j["jobs"] = jobs;
  return json::parse(j.dump());
}

PipelineOptions RunConfig::pipeline_options() const {
  PipelineOptions o;
  try {
    o.scheme = parse_scheme(scheme);
    if (!fabrication.empty()) o.scheme.fabrication = parse_engine_kind(fabrication);
    if (!combination.empty()) o.scheme.combination = parse_engine_kind(combination);
    if (!directive.empty()) o.scheme.directive = parse_directive_scheme(directive);
    o.decomposition = parse_decomposition_version(decomposition_version);
    o.fabrication_version = parse_fabrication_version(fabrication_version);
    o.combination_version = parse_combination_version(combination_version);
    o.plan_mode = parse_plan_mode(plan_mode);
    if (!attacks.empty()) {
      o.attack_types.clear();
      for (const auto& a : attacks) o.attack_types.push_back(parse_attack_type(a));
    }
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }
  o.m = m;
  o.repeats = repeats;
  o.seed = seed;
  o.consistency = {alpha, beta};
  o.refine = refine;
  o.llm_attack_generation = llm_attack_generation;
  o.text_completion_hints = completion_hints;
  if (!pools.empty()) o.pool = ReplacementPool::load_dir(pools);
  try {
    o.validate();
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }
  return o;
}

void RunConfig::validate() const {
  try {
    backend.validate();
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }
  auto must_exist = [](const std::string& path, const char* what) {
    if (!path.empty() && !fs::exists(path)) {
      throw ValidationError(std::string(what) + " '" + path + "' does not exist");
    }
  };
  must_exist(mock, "mock script");
  must_exist(pools, "pool directory");
  must_exist(corpus, "corpus");
  must_exist(templates, "scaffold templates");
  if (lambda && !(*lambda >= 0.0 && *lambda <= 1.0)) {
    throw ValidationError("lambda must be in [0, 1]");
  }
  if (jobs == 0) throw ValidationError("jobs must be >= 1");
  if (trials && *trials == 0) throw ValidationError("trials must be >= 1");
  if (per_category == 0) throw ValidationError("per-category must be >= 1");
}

// ---------------------------------------------------------------------------
// State files
// ---------------------------------------------------------------------------

namespace {

json transcript_json(const Transcript& t) {
  json a = json::array();
  for (const auto& m : t) a.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  return a;
}

Transcript transcript_from(const json& a) {
  Transcript t;
  for (const auto& m : a) t.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  return t;
}

json query_json(const AttackQuery& q) {
  return {{"type", std::string(to_string(q.type))},
          {"text", q.text},
          {"target_sub_qa", q.target_sub_qa},
          {"targets", q.targets},
          {"hints", q.hints},
          {"truth_polarity", q.truth_polarity}};
}

AttackQuery query_from(const json& j) {
  AttackQuery q;
  q.type = parse_attack_type(j.at("type").get<std::string>());
  q.text = j.at("text").get<std::string>();
  q.target_sub_qa = j.at("target_sub_qa").get<std::size_t>();
  q.targets = j.at("targets").get<std::vector<std::size_t>>();
  q.hints = j.at("hints").get<std::size_t>();
  q.truth_polarity = j.at("truth_polarity").get<bool>();
  return q;
}

json attack_json(const AttackResult& r) {
  json j = {{"query", query_json(r.query)}, {"answer", r.answer}, {"genuine", r.genuine}};
  if (r.error) j["error"] = *r.error;
  return j;
}

json state_json(const PipelineState& st, const RunConfig& cfg) {
  json j;
  j["config"] = cfg.to_json();
  j["question"] = json::parse(serialize_record(st.question));
  j["transcript"] = transcript_json(st.main.transcript());
  j["sub_qas"] = json::array();
  for (const auto& sq : st.sub_qas) {
    json s = {{"sub_question", sq.sub_question}, {"genuine_answer", sq.genuine_answer}, {"label", sq.label}};
    if (sq.answer_span) s["answer_span"] = {sq.answer_span->start, sq.answer_span->end};
    j["sub_qas"].push_back(s);
  }
  j["queries"] = json::array();
  for (const auto& q : st.queries) j["queries"].push_back(query_json(q));
  j["fabricated"] = json::array();
  for (const auto& f : st.fabricated) {
    json c = json::array();
    for (const auto& x : f.candidates) {
      c.push_back({{"text", x.text}, {"r_d", x.r_d}, {"s_c", x.s_c}, {"combined", x.combined}});
    }
    j["fabricated"].push_back({{"chosen", f.chosen}, {"candidates", c}});
  }
  j["synthetic"] = json::array();
  for (const auto& s : st.synthetic) {
    json o = {{"text", s.text}, {"values", s.values}};
    if (s.target_slot) o["target_slot"] = *s.target_slot;
    j["synthetic"].push_back(o);
  }
  j["obfuscated"] = st.obfuscated;
  j["acknowledgment"] = st.acknowledgment;
  j["attacks"] = json::array();
  for (const auto& a : st.attacks) j["attacks"].push_back(attack_json(a));
  j["trace"] = json::array();
  for (const auto& s : st.trace.stages) j["trace"].push_back({{"stage", s.stage}, {"queries", s.queries}});
  return j;
}

PipelineState state_from(const json& j, const BackendFactory& factory) {
  try {
    auto records = parse_corpus(j.at("question").dump(), "state");
    auto backend = factory(records.at(0));
    PipelineState st(records.at(0), backend);
    st.main = Session(std::move(backend), transcript_from(j.at("transcript")));
    for (const auto& s : j.at("sub_qas")) {
      SubQA sq;
      sq.sub_question = s.at("sub_question").get<std::string>();
      sq.genuine_answer = s.at("genuine_answer").get<std::string>();
      sq.label = s.at("label").get<std::string>();
      if (s.contains("answer_span")) {
        sq.answer_span = Span{s["answer_span"][0].get<std::size_t>(), s["answer_span"][1].get<std::size_t>()};
      }
      st.sub_qas.push_back(std::move(sq));
    }
    st.tmpl = build_template(st.question, st.sub_qas, AnchorPolicy::SkipUnanchored);
    for (const auto& q : j.at("queries")) st.queries.push_back(query_from(q));
    for (const auto& f : j.at("fabricated")) {
      FabricatedAnswer fa;
      fa.chosen = f.at("chosen").get<std::size_t>();
      for (const auto& c : f.at("candidates")) {
        fa.candidates.push_back({c.at("text").get<std::string>(), c.at("r_d").get<double>(),
                                 c.at("s_c").get<double>(), c.at("combined").get<double>()});
      }
      st.fabricated.push_back(std::move(fa));
    }
    for (const auto& s : j.at("synthetic")) {
      SyntheticQuestion q;
      q.text = s.at("text").get<std::string>();
      q.values = s.at("values").get<std::vector<std::string>>();
      if (s.contains("target_slot")) q.target_slot = s["target_slot"].get<std::size_t>();
      st.synthetic.push_back(std::move(q));
    }
    st.obfuscated = j.at("obfuscated").get<bool>();
    st.acknowledgment = j.at("acknowledgment").get<std::string>();
    for (const auto& a : j.at("attacks")) {
      AttackResult r;
      r.query = query_from(a.at("query"));
      r.answer = a.at("answer").get<std::string>();
      r.genuine = a.at("genuine").get<std::string>();
      if (a.contains("error")) r.error = a["error"].get<std::string>();
      st.attacks.push_back(std::move(r));
    }
    for (const auto& s : j.at("trace")) {
      st.trace.stages.push_back({s.at("stage").get<std::string>(), s.at("queries").get<std::size_t>()});
    }
    return st;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed state file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
  std::string command;
  std::string state_path;
  std::vector<std::pair<std::string, std::string>> outputs;  // relative path, sha256

  fs::path out_dir() const { return cfg.out; }

  void emit(const std::string& rel, const std::string& text) {
    write_text(out_dir() / rel, text);
    outputs.emplace_back(rel, assets::sha256_hex(text));
  }

  void manifest() {
    ordered_json m;
    m["tool"] = "p2f";
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["catalog_digest"] = assets::catalog_digest();
    m["config"] = cfg.to_json();
    // Where the files went is not part of what produced them.
    m["config"].erase("out");
    m["outputs"] = ordered_json::object();
    for (const auto& [rel, digest] : outputs) m["outputs"][rel] = digest;
    write_text(out_dir() / "manifest.json", m.dump(2) + "\n");
  }
};

BackendFactory backend_factory(const RunConfig& cfg) {
  if (!cfg.mock.empty()) {
    const std::string script = read_text(cfg.mock);
    // A fresh mock per question so scripted reply sequences do not depend
    // on scheduling.
    return [script](const QuestionRecord&) -> std::shared_ptr<ChatBackend> {
      return MockBackend::from_json(script);
    };
  }
  auto http = std::make_shared<HttpChatBackend>(cfg.backend);
  return [http](const QuestionRecord&) -> std::shared_ptr<ChatBackend> { return http; };
}

std::vector<QuestionRecord> load_questions(const RunConfig& cfg) {
  std::vector<QuestionRecord> corpus;
  if (!cfg.corpus.empty()) {
    corpus = load_corpus(cfg.corpus);
  } else if (!cfg.question.empty()) {
    QuestionRecord r;
    r.id = cfg.id.empty() ? "q1" : cfg.id;
    r.category = Category::Personal;
    r.text = cfg.question;
    validate(r);
    return {r};
  } else {
    throw ValidationError("no input: pass --corpus or --question");
  }
  if (!cfg.id.empty()) {
    for (const auto& r : corpus) {
      if (r.id == cfg.id) return {r};
    }
    throw ValidationError("no record with id '" + cfg.id + "' in " + cfg.corpus);
  }
  return corpus;
}

std::string session_json(const PipelineResult& r) {
  ordered_json j;
  j["id"] = r.state.question.id;
  j["scheme"] = r.report.scheme;
  j["transcript"] = ordered_json::parse(transcript_json(r.state.main.transcript()).dump());
  j["attacks"] = json::array();
  for (const auto& a : r.state.attacks) j["attacks"].push_back(ordered_json::parse(attack_json(a).dump()));
  return j.dump(2) + "\n";
}

void cmd_pipeline(Context& ctx) {
  const auto options = ctx.cfg.pipeline_options();
  const auto corpus = load_questions(ctx.cfg);
  const auto run = run_corpus(corpus, options, backend_factory(ctx.cfg), ctx.cfg.jobs);
  for (const auto& r : run.results) ctx.emit("sessions/" + r.state.question.id + ".json", session_json(r));
  ctx.emit("report.csv", render_table(to_table(run.report), "csv"));
  ctx.emit("types.csv", render_table(type_table(run.report), "csv"));
  const std::string md = render_report(run.report, "markdown");
  ctx.emit("report.md", md);
  ctx.out << md;
}

void cmd_ablate(Context& ctx) {
  std::vector<QuestionRecord> corpus;
  if (!ctx.cfg.corpus.empty() || !ctx.cfg.question.empty()) {
    corpus = load_questions(ctx.cfg);
  } else {
    const auto templates = ctx.cfg.templates.empty() ? builtin_scaffold_templates()
                                                     : load_scaffold_templates(ctx.cfg.templates);
    corpus = scaffold_generate(templates, ctx.cfg.per_category, ctx.cfg.seed);
  }
  std::vector<AblationConfig> configs;
  try {
    for (const auto& c : ctx.cfg.configs) configs.push_back(parse_ablation_config(c));
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }
  AblationOptions o;
  o.leak_rate = ctx.cfg.lambda.value_or(0.5);
  o.r = ctx.cfg.r;
  o.trials = ctx.cfg.trials.value_or(1);
  o.seed = ctx.cfg.seed;
  if (!ctx.cfg.pools.empty()) o.pool = ReplacementPool::load_dir(ctx.cfg.pools);
  const auto result = run_ablation(corpus, configs, o);
  const auto table = to_table(result);
  ctx.emit("report.csv", render_table(table, "csv"));
  const std::string md = render_table(table, "markdown") + "\nordering: " + result.ordering + "\n";
  ctx.emit("report.md", md);
  ctx.out << md;
}

void cmd_sweep(Context& ctx) {
  SweepConfig s;
  s.ratios = ctx.cfg.ratios;
  s.hints = ctx.cfg.hints;
  s.leak_rate = ctx.cfg.lambda.value_or(1.0);
  s.trials = ctx.cfg.trials.value_or(1000);
  s.seed = ctx.cfg.seed;
  if (!ctx.cfg.corpus.empty() || !ctx.cfg.question.empty()) s.question = load_questions(ctx.cfg).at(0);
  if (!ctx.cfg.pools.empty()) s.pool = ReplacementPool::load_dir(ctx.cfg.pools);
  const auto result = run_ratio_sweep(s);
  const auto table = to_table(result);
  ctx.emit("report.csv", render_table(table, "csv"));
  const std::string md = render_table(table, "markdown");
  ctx.emit("report.md", md);
  ctx.out << md;
}

void cmd_scaffold(Context& ctx) {
  const auto templates = ctx.cfg.templates.empty() ? builtin_scaffold_templates()
                                                   : load_scaffold_templates(ctx.cfg.templates);
  const auto corpus = scaffold_generate(templates, ctx.cfg.per_category, ctx.cfg.seed);
  ctx.emit("corpus.jsonl", serialize_corpus(corpus));
  ctx.out << corpus.size() << " records written to " << (ctx.out_dir() / "corpus.jsonl").string()
          << "\n";
}

// Staged commands share one state file.
PipelineState load_state(Context& ctx) {
  const json doc = [&] {
    try {
      return json::parse(read_text(ctx.state_path));
    } catch (const json::parse_error& e) {
      throw ValidationError(ctx.state_path + ": " + e.what());
    }
  }();
  return state_from(doc, backend_factory(ctx.cfg));
}

void save_state(Context& ctx, const PipelineState& st) {
  const std::string text = json(state_json(st, ctx.cfg)).dump(2) + "\n";
  write_text(ctx.state_path, text);
  ctx.outputs.emplace_back(fs::path(ctx.state_path).filename().string(), assets::sha256_hex(text));
}

void cmd_decompose(Context& ctx) {
  const auto options = ctx.cfg.pipeline_options();
  const auto questions = load_questions(ctx.cfg);
  if (questions.size() != 1) {
    throw ValidationError("decompose works on one question; pick one with --id");
  }
  PipelineState st(questions[0], backend_factory(ctx.cfg)(questions[0]));
  stage_decompose(st, options);
  save_state(ctx, st);
  for (std::size_t i = 0; i < st.sub_qas.size(); ++i) {
    ctx.out << i + 1 << ". " << st.sub_qas[i].sub_question << " -> " << st.sub_qas[i].genuine_answer
            << "\n";
  }
}

template <class Stage>
void staged(Context& ctx, Stage stage) {
  auto st = load_state(ctx);
  const auto options = ctx.cfg.pipeline_options();
  stage(st, options);
  save_state(ctx, st);
}

void cmd_evaluate(Context& ctx) {
  auto st = load_state(ctx);
  const auto options = ctx.cfg.pipeline_options();
  if (st.attacks.empty()) throw ValidationError("no attack results in state; run 'attack' first");
  const auto report = stage_score(st, options);
  ctx.emit("report.csv", render_table(to_table(report), "csv"));
  ctx.emit("types.csv", render_table(type_table(report), "csv"));
  const std::string md = render_report(report, "markdown");
  ctx.emit("report.md", md);
  ctx.out << md;
}

void cmd_validate_corpus(Context& ctx, const std::string& path) {
  const auto corpus = load_corpus(path);
  ctx.out << path << ": " << corpus.size() << " valid records\n";
}

// Collects flag values and applies only those given on the command line, on
// top of whatever the config file set.
class Overrides {
 public:
  template <class T, class Set>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& desc, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* o = app->add_option(name, *value, desc);
    fields_.push_back({o, [value, set](RunConfig& c) { set(c, *value); }});
    return o;
  }
  void flag(CLI::App* app, const std::string& name, const std::string& desc,
            std::function<void(RunConfig&)> set) {
    fields_.push_back({app->add_flag(name, desc), std::move(set)});
  }
  void apply(RunConfig& c) const {
    for (const auto& f : fields_) {
      if (f.option->count() > 0) f.set(c);
    }
  }

 private:
  struct Field {
    CLI::Option* option;
    std::function<void(RunConfig&)> set;
  };
  std::vector<Field> fields_;
};

void common_flags(CLI::App* app, Overrides& ov, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config file; flags override its values");
  ov.add<std::string>(app, "-o,--out", "output directory", [](RunConfig& c, std::string v) { c.out = v; });
  ov.add<std::uint64_t>(app, "--seed", "run seed", [](RunConfig& c, std::uint64_t v) { c.seed = v; });
}

void input_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::string>(app, "--corpus", "line-delimited JSON corpus",
                      [](RunConfig& c, std::string v) { c.corpus = v; });
  ov.add<std::string>(app, "--question", "a single question instead of a corpus",
                      [](RunConfig& c, std::string v) { c.question = v; });
  ov.add<std::string>(app, "--id", "record id to pick from the corpus",
                      [](RunConfig& c, std::string v) { c.id = v; });
  ov.add<std::string>(app, "--pools", "directory of replacement pools",
                      [](RunConfig& c, std::string v) { c.pools = v; });
}

void backend_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::string>(app, "--mock", "mock script (JSON) used instead of the HTTP backend",
                      [](RunConfig& c, std::string v) { c.mock = v; });
  ov.add<std::string>(app, "--base-url", "chat-completions base URL",
                      [](RunConfig& c, std::string v) { c.backend.base_url = v; });
  ov.add<std::string>(app, "--model", "model name", [](RunConfig& c, std::string v) { c.backend.model = v; });
  ov.add<double>(app, "--temperature", "sampling temperature",
                 [](RunConfig& c, double v) { c.backend.temperature = v; });
  ov.add<long long>(app, "--timeout-ms", "request timeout",
                    [](RunConfig& c, long long v) { c.backend.timeout = std::chrono::milliseconds(v); });
}

void scheme_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::string>(app, "--scheme", "standard, di-v1..di-v4, p2f-llm, p2f-local, p2f-local-gen, p2f-local-all",
                      [](RunConfig& c, std::string v) { c.scheme = v; });
  ov.add<std::string>(app, "--fabrication", "fabrication engine: llm or local",
                      [](RunConfig& c, std::string v) { c.fabrication = v; });
  ov.add<std::string>(app, "--combination", "combination engine: llm or local",
                      [](RunConfig& c, std::string v) { c.combination = v; });
  ov.add<std::string>(app, "--directive", "directive override, e.g. P2F_V2",
                      [](RunConfig& c, std::string v) { c.directive = v; });
  ov.add<std::string>(app, "--decomposition-version", "V1 or V2",
                      [](RunConfig& c, std::string v) { c.decomposition_version = v; });
  ov.add<std::string>(app, "--fabrication-version", "V1 or V2",
                      [](RunConfig& c, std::string v) { c.fabrication_version = v; });
  ov.add<std::string>(app, "--combination-version", "V1 or V2",
                      [](RunConfig& c, std::string v) { c.combination_version = v; });
  ov.add<std::size_t>(app, "-m,--candidates", "synthetic candidates per sub-question",
                      [](RunConfig& c, std::size_t v) { c.m = v; });
  ov.add<std::size_t>(app, "--repeats", "combined questions per target",
                      [](RunConfig& c, std::size_t v) { c.repeats = v; });
  ov.add<std::string>(app, "--plan-mode", "force-fake or keep-genuine",
                      [](RunConfig& c, std::string v) { c.plan_mode = v; });
  ov.add<double>(app, "--alpha", "length weight of S_c", [](RunConfig& c, double v) { c.alpha = v; });
  ov.add<double>(app, "--beta", "word-class weight of S_c", [](RunConfig& c, double v) { c.beta = v; });
  ov.add<std::vector<std::string>>(app, "--attacks", "attack types, comma separated",
                                   [](RunConfig& c, std::vector<std::string> v) { c.attacks = v; })
      ->delimiter(',');
  ov.add<std::size_t>(app, "--completion-hints", "values revealed in text-completion attacks",
                      [](RunConfig& c, std::size_t v) { c.completion_hints = v; });
  ov.flag(app, "--no-refine", "skip decomposition refinement", [](RunConfig& c) { c.refine = false; });
  ov.flag(app, "--template-attacks", "build fact-check attacks locally instead of asking the model",
          [](RunConfig& c) { c.llm_attack_generation = false; });
}

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->backend_failure() ? 2 : 1;
  if (dynamic_cast<const BackendError*>(&e)) return 2;
  return 1;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt2Forget: decompose, fabricate, obfuscate and attack chat sessions"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path;
  std::string state_path;
  std::string corpus_arg;

  struct Sub {
    CLI::App* app;
    std::function<void(Context&)> run;
  };
  std::vector<Sub> subs;
  auto sub = [&](const char* name, const char* desc, std::function<void(Context&)> run) {
    CLI::App* s = app.add_subcommand(name, desc);
    common_flags(s, ov, config_path);
    subs.push_back({s, std::move(run)});
    return s;
  };

  auto* pipeline = sub("pipeline", "run every stage over a corpus and score forgetfulness", cmd_pipeline);
  input_flags(pipeline, ov);
  backend_flags(pipeline, ov);
  scheme_flags(pipeline, ov);
  ov.add<std::size_t>(pipeline, "--jobs", "questions processed concurrently",
                      [](RunConfig& c, std::size_t v) { c.jobs = v; });

  auto* decompose = sub("decompose", "ask, decompose and answer one question; writes state.json", cmd_decompose);
  input_flags(decompose, ov);
  backend_flags(decompose, ov);
  scheme_flags(decompose, ov);

  auto add_staged = [&](const char* name, const char* desc, std::function<void(Context&)> run) {
    auto* s = sub(name, desc, std::move(run));
    s->add_option("--state", state_path, "state file (default <out>/state.json)");
    backend_flags(s, ov);
    scheme_flags(s, ov);
    ov.add<std::string>(s, "--pools", "directory of replacement pools",
                        [](RunConfig& c, std::string v) { c.pools = v; });
  };
  add_staged("fabricate", "fabricate and select synthetic sub-answers",
             [](Context& c) { staged(c, stage_fabricate); });
  add_staged("combine", "combine synthetic sub-answers into questions",
             [](Context& c) { staged(c, stage_combine); });
  add_staged("obfuscate", "send the obfuscation directive",
             [](Context& c) { staged(c, stage_obfuscate); });
  add_staged("attack", "run the prepared attacks against the session",
             [](Context& c) { staged(c, stage_attack); });
  add_staged("evaluate", "score attack results and write reports", cmd_evaluate);

  auto* ablate = sub("ablate", "ablation study against the memory simulator", cmd_ablate);
  input_flags(ablate, ov);
  ov.add<std::vector<std::string>>(ablate, "--configs", "full, no-decomposition, no-combination, di, standard",
                                   [](RunConfig& c, std::vector<std::string> v) { c.configs = v; })
      ->delimiter(',');
  ov.add<double>(ablate, "--lambda", "leak rate of denied statements (default 0.5)",
                 [](RunConfig& c, double v) { c.lambda = v; });
  ov.add<std::size_t>(ablate, "--r", "synthetics per genuine statement", [](RunConfig& c, std::size_t v) { c.r = v; });
  ov.add<std::size_t>(ablate, "--trials", "repetitions of each attack (default 1)", [](RunConfig& c, std::size_t v) { c.trials = v; });
  ov.add<std::size_t>(ablate, "--per-category", "scaffold questions per category when no corpus is given",
                      [](RunConfig& c, std::size_t v) { c.per_category = v; });
  ov.add<std::string>(ablate, "--templates", "scaffold templates JSON",
                      [](RunConfig& c, std::string v) { c.templates = v; });

  auto* sweep = sub("sweep", "fake-to-true ratio sweep against the memory simulator", cmd_sweep);
  input_flags(sweep, ov);
  ov.add<std::vector<std::size_t>>(sweep, "--ratios", "fake-to-true ratios, comma separated",
                                   [](RunConfig& c, std::vector<std::size_t> v) { c.ratios = v; })
      ->delimiter(',');
  ov.add<std::vector<std::size_t>>(sweep, "--hints", "hint counts, comma separated",
                                   [](RunConfig& c, std::vector<std::size_t> v) { c.hints = v; })
      ->delimiter(',');
  ov.add<double>(sweep, "--lambda", "leak rate of denied statements (default 1)",
                 [](RunConfig& c, double v) { c.lambda = v; });
  ov.add<std::size_t>(sweep, "--trials", "Monte Carlo trials per cell (default 1000)", [](RunConfig& c, std::size_t v) { c.trials = v; });

  auto* scaffold = sub("scaffold", "generate a corpus from slot templates", cmd_scaffold);
  ov.add<std::size_t>(scaffold, "--per-category", "questions per category",
                      [](RunConfig& c, std::size_t v) { c.per_category = v; });
  ov.add<std::string>(scaffold, "--templates", "scaffold templates JSON",
                      [](RunConfig& c, std::string v) { c.templates = v; });

  auto* validate_corpus = app.add_subcommand("validate-corpus", "check a corpus file");
  validate_corpus->add_option("corpus", corpus_arg, "corpus file")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    const CLI::App* active = &app;
    for (auto* s : app.get_subcommands()) active = s;
    err << active->help();
    return 1;
  }

  try {
    if (validate_corpus->parsed()) {
      Context ctx{RunConfig{}, out, err, "validate-corpus", "", {}};
      cmd_validate_corpus(ctx, corpus_arg);
      return 0;
    }
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      RunConfig cfg;
      const bool staged_cmd = s.app->get_option_no_throw("--state") != nullptr;
      if (staged_cmd) {
        // Defaults come from the state written by the previous stage.
        std::string path = state_path;
        if (path.empty()) {
          RunConfig probe;
          ov.apply(probe);
          path = (fs::path(probe.out) / "state.json").string();
        }
        state_path = path;
        try {
          cfg = RunConfig::from_json(json::parse(read_text(path)).at("config"));
        } catch (const json::exception& e) {
          throw ValidationError(path + ": " + e.what());
        }
      }
      if (!config_path.empty()) {
        try {
          cfg = RunConfig::from_json(json::parse(read_text(config_path)));
        } catch (const json::parse_error& e) {
          throw ValidationError(config_path + ": " + e.what());
        }
      }
      ov.apply(cfg);
      cfg.validate();
      Context ctx{cfg, out, err, s.app->get_name(), state_path, {}};
      if (s.app->get_name() == "decompose") ctx.state_path = (fs::path(cfg.out) / "state.json").string();
      s.run(ctx);
      ctx.manifest();
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}

}  // namespace p2f
