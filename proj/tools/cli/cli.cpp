// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "tirforge/align_math.hpp"
#include "tirforge/dataset_builder.hpp"
#include "tirforge/error.hpp"
#include "tirforge/eval_harness.hpp"
#include "tirforge/hash.hpp"
#include "tirforge/parallel.hpp"
#include "tirforge/response_parser.hpp"
#include "tirforge/schema.hpp"
#include "tirforge/teacher_client.hpp"
#include "tirforge/version.hpp"

namespace tirforge::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Setting keys each subcommand exposes as flags.
const std::vector<std::string> kEndpointKeys = {"endpoint",    "model",       "max_concurrency",
                                                "timeout",     "max_retries", "temperature",
                                                "backoff_ms",  "cache_dir",   "no_cache"};
const std::vector<std::string> kExecKeys = {"interpreter", "exec_timeout", "exec_mem_mb", "rel_tol",
                                            "integer_mode"};
const std::vector<std::string> kBuildKeys = {"filter_level", "filter_scope", "split_ratio"};

struct Common {
  std::string config_path;
  bool dry_run = false;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
};

std::string dashed(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

void add_setting_flags(CLI::App* sub, Common& c, const std::vector<std::string>& keys) {
  for (const auto& k : keys) {
    const auto& def = setting_defaults().at(k);
    std::string help = "setting " + k + " (default: " + (def.empty() ? "unset" : def) + ")";
    c.flag_options[sub->get_name() + "/" + k] =
        sub->add_option("--" + dashed(k), c.flag_values[k], help);
  }
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value settings file");
  sub->add_flag("--dry-run", c.dry_run, "print the resolved plan and exit without side effects");
  add_setting_flags(sub, c, {"seed", "workers"});
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw FormatError("cannot write " + p.string());
}

template <class T>
std::string jsonl(std::span<const T> rows) {
  std::string s;
  for (const auto& r : rows) {
    s += to_json_line(r);
    s += '\n';
  }
  return s;
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Everything a subcommand needs after configuration sources are merged.
struct Context {
  Settings settings;
  RunConfig rc;
  EnvLookup env;
  std::ostream& out;
  std::ostream& err;
  bool dry_run = false;
};

void print_plan(Context& ctx, std::string_view command,
                const std::vector<std::pair<std::string, std::string>>& io) {
  ctx.out << "dry run: " << command << "\n";
  for (const auto& [k, v] : io) ctx.out << "  " << k << ": " << v << "\n";
  ctx.out << "settings:\n" << render_settings(ctx.settings, ctx.env);
}

std::unique_ptr<ChatClient> make_client(const Context& ctx, std::unique_ptr<CacheStore>& cache) {
  if (ctx.rc.use_cache) cache = std::make_unique<CacheStore>(ctx.rc.cache_dir);
  return std::make_unique<ChatClient>(ctx.rc.endpoint, cache.get());
}

Manifest base_manifest(const Context& ctx, std::size_t records, std::size_t kept,
                       const Sandbox& sandbox) {
  Manifest m;
  m.records = records;
  m.kept_records = kept;
  m.split_ratio = ctx.rc.split_ratio;
  m.seed = ctx.rc.seed;
  m.policy = ctx.rc.filter;
  m.tool_versions = {{"tirforge", kVersion},
                     {"interpreter", ctx.rc.sandbox.interpreter},
                     {"interpreter_path", sandbox.interpreter_path()}};
  return m;
}

void report_drops(const Context& ctx, const std::vector<FilterDecision>& decisions) {
  std::size_t kept = 0;
  for (const auto& d : decisions) {
    if (d.kept) {
      ++kept;
    } else {
      ctx.err << "dropped " << d.problem_id << ": " << d.reason << "\n";
    }
  }
  ctx.err << "kept " << kept << " of " << decisions.size() << " records\n";
}

// --- generate ----------------------------------------------------------------

struct GenerateArgs {
  std::string problems;
  std::string out;
  std::string rejects;
};

int cmd_generate(Context& ctx, const GenerateArgs& a) {
  if (ctx.dry_run) {
    print_plan(ctx, "generate",
               {{"problems", a.problems},
                {"out", a.out},
                {"rejects", a.rejects.empty() ? "(none)" : a.rejects},
                {"cache", ctx.rc.use_cache ? ctx.rc.cache_dir.string() : "(disabled)"}});
    return kExitOk;
  }
  auto problems = read_jsonl<Problem>(a.problems);
  index_problems(problems);
  std::unique_ptr<CacheStore> cache;
  auto client = make_client(ctx, cache);

  struct Outcome {
    std::optional<TeacherRecord> record;
    std::string reject;
    int retries = 0;
  };
  auto results = parallel_map(std::span<const Problem>(problems), ctx.rc.workers,
                              [&](const Problem& p) {
                                Outcome o;
                                ChatReply reply = request_solution(p, *client);
                                o.retries = reply.retries;
                                try {
                                  o.record = parse_teacher_response(reply.text, p.id);
                                } catch (const ParseError& e) {
                                  o.reject = e.what();
                                }
                                return o;
                              });

  std::vector<TeacherRecord> records;
  std::string rejects;
  int retries = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    retries += results[i].retries;
    if (results[i].record) {
      records.push_back(std::move(*results[i].record));
    } else {
      ctx.err << "rejected " << problems[i].id << ": " << results[i].reject << "\n";
      rejects += ojson{{"problem_id", problems[i].id}, {"error", results[i].reject}}.dump() + "\n";
    }
  }
  write_jsonl(a.out, records);
  if (!a.rejects.empty()) write_file(a.rejects, rejects);
  ctx.err << "generated " << records.size() << " records (" << problems.size() - records.size()
          << " rejected, " << retries << " retries, " << client->network_calls()
          << " network calls)\n";
  return kExitOk;
}

// --- build-sft / build-dpo ---------------------------------------------------------------

struct BuildArgs {
  std::string problems;
  std::string records;
  std::string out_dir;
};

template <class Row, class BuildFn>
int cmd_build(Context& ctx, const BuildArgs& a, std::string_view stage, BuildFn build) {
  const fs::path dir(a.out_dir);
  const std::string all = std::string(stage) + ".jsonl";
  const std::string train = std::string(stage) + "_train.jsonl";
  const std::string val = std::string(stage) + "_val.jsonl";
  if (ctx.dry_run) {
    print_plan(ctx, std::string("build-") + std::string(stage),
               {{"problems", a.problems},
                {"records", a.records},
                {"out", (dir / all).string()},
                {"train", (dir / train).string()},
                {"val", (dir / val).string()},
                {"manifest", (dir / "manifest.json").string()}});
    return kExitOk;
  }
  auto problems = read_jsonl<Problem>(a.problems);
  auto index = index_problems(problems);
  auto records = read_jsonl<TeacherRecord>(a.records);
  Sandbox sandbox(ctx.rc.sandbox);

  BuildContext bc;
  bc.problems = &index;
  bc.policy = ctx.rc.filter;
  bc.sandbox = &sandbox;
  bc.limits = ctx.rc.limits;
  bc.equiv = ctx.rc.equiv;
  bc.workers = ctx.rc.workers;

  std::vector<FilterDecision> decisions;
  std::vector<Row> rows = build(std::span<const TeacherRecord>(records), bc, &decisions);
  report_drops(ctx, decisions);
  auto split = split_train_val(std::span<const Row>(rows), ctx.rc.split_ratio, ctx.rc.seed);

  fs::create_directories(dir);
  write_jsonl(dir / all, rows);
  write_jsonl(dir / train, split.train);
  write_jsonl(dir / val, split.val);

  std::size_t kept = 0;
  for (const auto& d : decisions) kept += d.kept;
  Manifest m = base_manifest(ctx, records.size(), kept, sandbox);
  (stage == "sft" ? m.sft_examples : m.dpo_pairs) = rows.size();
  m.train = split.train.size();
  m.val = split.val.size();
  write_manifest(dir / "manifest.json", stage, m);
  ctx.out << stage << ": " << rows.size() << " rows, train " << split.train.size() << ", val "
          << split.val.size() << "\n";
  return kExitOk;
}

// --- eval ----------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> benchmarks;
  std::string completions;
  std::string out;
  std::string md;
  std::string details;
};

std::unordered_map<std::string, std::string> load_completions(const fs::path& p) {
  std::unordered_map<std::string, std::string> out;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot read " + p.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("completion") || !j["completion"].is_string()) {
      throw MalformedRow(lineno, "expected {\"id\", \"completion\"}");
    }
    if (!out.emplace(j["id"].get<std::string>(), j["completion"].get<std::string>()).second) {
      throw DuplicateId(j["id"].get<std::string>());
    }
  }
  return out;
}

int cmd_eval(Context& ctx, const EvalArgs& a) {
  std::string bench_list;
  for (const auto& b : a.benchmarks) bench_list += (bench_list.empty() ? "" : ", ") + b;
  if (ctx.dry_run) {
    print_plan(ctx, "eval",
               {{"benchmarks", bench_list},
                {"mode", a.completions.empty() ? "query endpoint" : "offline: " + a.completions},
                {"out", a.out.empty() ? "(stdout)" : a.out},
                {"md", a.md.empty() ? "(none)" : a.md},
                {"details", a.details.empty() ? "(none)" : a.details}});
    return kExitOk;
  }
  std::vector<EvalProblem> problems;
  for (const auto& b : a.benchmarks) {
    auto rows = load_benchmark(b);
    problems.insert(problems.end(), rows.begin(), rows.end());
  }
  Sandbox sandbox(ctx.rc.sandbox);
  std::vector<EvalDetail> details;
  if (!a.completions.empty()) {
    auto by_id = load_completions(a.completions);
    std::vector<std::string> completions;
    completions.reserve(problems.size());
    for (const auto& p : problems) {
      auto it = by_id.find(p.id);
      if (it == by_id.end()) ctx.err << "no completion for " << p.id << "; scored as empty\n";
      completions.push_back(it == by_id.end() ? std::string() : it->second);
    }
    details = score_completions(problems, completions, sandbox, ctx.rc.limits, ctx.rc.equiv,
                                ctx.rc.workers);
  } else {
    std::unique_ptr<CacheStore> cache;
    auto client = make_client(ctx, cache);
    details = run_eval(problems, *client, sandbox, ctx.rc.limits, ctx.rc.equiv, ctx.rc.workers);
  }

  RunMetadata meta;
  meta.model_name = ctx.rc.endpoint.model_name;
  meta.timestamp = utc_timestamp();
  meta.config_hash = sha256_hex(render_settings(ctx.settings, ctx.env)).substr(0, 16);
  std::vector<Report> reports{build_report(meta, details)};
  std::string report_json = render_json(reports);
  if (a.out.empty()) {
    ctx.out << report_json;
  } else {
    write_file(a.out, report_json);
  }
  if (!a.md.empty()) write_file(a.md, render_markdown(reports));
  if (!a.details.empty()) write_file(a.details, render_details_jsonl(details));
  for (const auto& row : reports[0].rows) {
    ctx.err << row.benchmark << ": n=" << row.metrics.n << " Code@1=" << row.metrics.code1
            << " Code+Pass@1=" << row.metrics.codepass1 << " Pass@1=" << row.metrics.pass1 << "\n";
  }
  return kExitOk;
}

// --- loss ----------------------------------------------------------------------

struct LossArgs {
  std::string input;
  double beta = DPOConfig{}.beta;
  bool length_normalized = false;
};

std::vector<json> loss_records(const std::string& text) {
  json whole = json::parse(text, nullptr, false);
  if (!whole.is_discarded()) {
    if (whole.is_array()) return whole.get<std::vector<json>>();
    if (whole.is_object()) return {whole};
  }
  std::vector<json> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedRow(lineno, "not a JSON object");
    rows.push_back(std::move(j));
  }
  return rows;
}

double number_field(const json& j, const char* key, std::size_t index) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw MalformedRow(index + 1, std::string("missing numeric \"") + key + "\"");
  }
  return it->get<double>();
}

int cmd_loss(Context& ctx, const LossArgs& a) {
  if (ctx.dry_run) {
    print_plan(ctx, "loss",
               {{"input", a.input},
                {"default beta", fmt_fraction(a.beta)},
                {"length normalized", a.length_normalized ? "yes" : "no"}});
    return kExitOk;
  }
  auto rows = loss_records(read_file(a.input));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& r = rows[i];
    ojson line;
    line["index"] = i;
    if (r.contains("token_logprobs")) {
      TokenLogprobs lp{r["token_logprobs"].get<std::vector<double>>()};
      line["kind"] = "sft";
      line["loss"] = sft_nll(lp);
    } else {
      DPOInputs in;
      in.lp_policy_w = number_field(r, "lp_policy_w", i);
      in.lp_policy_l = number_field(r, "lp_policy_l", i);
      in.lp_ref_w = number_field(r, "lp_ref_w", i);
      in.lp_ref_l = number_field(r, "lp_ref_l", i);
      in.beta = r.contains("beta") ? number_field(r, "beta", i) : a.beta;
      DPOOptions opts;
      if (a.length_normalized) {
        opts.length_normalized = true;
        opts.len_w = number_field(r, "len_w", i);
        opts.len_l = number_field(r, "len_l", i);
      }
      auto g = dpo_loss_grad(in, opts);
      line["kind"] = "dpo";
      line["margin"] = dpo_margin(in, opts);
      line["loss"] = dpo_loss(in, opts);
      line["grad"] = {{"lp_policy_w", g.d_policy_w},
                      {"lp_policy_l", g.d_policy_l},
                      {"lp_ref_w", g.d_ref_w},
                      {"lp_ref_l", g.d_ref_l}};
    }
    ctx.out << line.dump() << "\n";
  }
  return kExitOk;
}

// --- agree / judge ---------------------------------------------------------------

struct LabelRow {
  std::optional<std::string> id;
  PatternLabel label;
};

std::vector<LabelRow> read_labels(const fs::path& p) {
  std::vector<LabelRow> out;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot read " + p.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    if (line[b] != '{') {
      auto l = parse_pattern_label(line);
      if (!l) throw MalformedRow(lineno, "expected A or B");
      out.push_back({std::nullopt, *l});
      continue;
    }
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedRow(lineno, "not a JSON object");
    std::optional<PatternLabel> label;
    for (const char* key : {"label", "chosen_pattern", "winner_pattern", "pattern"}) {
      if (j.contains(key) && j[key].is_string()) {
        label = parse_pattern_label(j[key].get<std::string>());
        break;
      }
    }
    if (!label) throw MalformedRow(lineno, "no A/B label field");
    std::optional<std::string> id;
    for (const char* key : {"id", "problem_id"}) {
      if (j.contains(key) && j[key].is_string()) {
        id = j[key].get<std::string>();
        break;
      }
    }
    out.push_back({id, *label});
  }
  return out;
}

struct AgreeArgs {
  std::string a;
  std::string b;
};

int cmd_agree(Context& ctx, const AgreeArgs& args) {
  if (ctx.dry_run) {
    print_plan(ctx, "agree", {{"a", args.a}, {"b", args.b}});
    return kExitOk;
  }
  auto ra = read_labels(args.a);
  auto rb = read_labels(args.b);
  std::vector<PatternLabel> la;
  std::vector<PatternLabel> lb;
  bool keyed = !ra.empty() && !rb.empty();
  for (const auto& r : ra) keyed = keyed && r.id.has_value();
  for (const auto& r : rb) keyed = keyed && r.id.has_value();
  if (keyed) {
    if (ra.size() != rb.size()) {
      throw LengthMismatch("label files hold " + std::to_string(ra.size()) + " and " +
                           std::to_string(rb.size()) + " rows");
    }
    std::unordered_map<std::string, PatternLabel> by_id;
    for (const auto& r : rb) {
      if (!by_id.emplace(*r.id, r.label).second) throw DuplicateId(*r.id);
    }
    for (const auto& r : ra) {
      auto it = by_id.find(*r.id);
      if (it == by_id.end()) throw UnknownProblemId(*r.id);
      la.push_back(r.label);
      lb.push_back(it->second);
    }
  } else {
    for (const auto& r : ra) la.push_back(r.label);
    for (const auto& r : rb) lb.push_back(r.label);
  }
  ctx.out << fmt_fraction(agreement_rate(la, lb)) << "\n";
  return kExitOk;
}

struct JudgeArgs {
  std::string problems;
  std::string out;
};

int cmd_judge(Context& ctx, const JudgeArgs& a) {
  if (ctx.dry_run) {
    print_plan(ctx, "judge", {{"problems", a.problems}, {"out", a.out.empty() ? "(stdout)" : a.out}});
    return kExitOk;
  }
  auto problems = read_jsonl<Problem>(a.problems);
  index_problems(problems);
  std::unique_ptr<CacheStore> cache;
  auto client = make_client(ctx, cache);
  auto labels = parallel_map(std::span<const Problem>(problems), ctx.rc.workers,
                             [&](const Problem& p) { return judge_pattern(p, *client); });
  std::string text;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    text += ojson{{"id", problems[i].id}, {"label", std::string(1, to_char(labels[i]))}}.dump();
    text += '\n';
  }
  if (a.out.empty()) {
    ctx.out << text;
  } else {
    write_file(a.out, text);
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tirforge: pattern-aware tool-integrated reasoning data and evaluation pipeline",
               "tirforge"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  GenerateArgs gen;
  BuildArgs sft;
  BuildArgs dpo;
  EvalArgs ev;
  LossArgs loss;
  AgreeArgs agree;
  JudgeArgs judge;

  auto* g = app.add_subcommand("generate", "query the teacher for dual-pattern solutions");
  add_common(g, common);
  add_setting_flags(g, common, kEndpointKeys);
  g->add_option("--problems", gen.problems, "problems JSONL")->required();
  g->add_option("--out", gen.out, "teacher records JSONL to write")->required();
  g->add_option("--rejects", gen.rejects, "JSONL of replies that failed to parse");

  auto* s = app.add_subcommand("build-sft", "emit stage-1 SFT rows from teacher records");
  auto* d = app.add_subcommand("build-dpo", "emit stage-2 preference pairs from teacher records");
  for (auto [sub, args] : {std::pair{s, &sft}, std::pair{d, &dpo}}) {
    add_common(sub, common);
    add_setting_flags(sub, common, kExecKeys);
    add_setting_flags(sub, common, kBuildKeys);
    sub->add_option("--problems", args->problems, "problems JSONL")->required();
    sub->add_option("--records", args->records, "teacher records JSONL")->required();
    sub->add_option("--out-dir", args->out_dir, "output directory")->required();
  }

  auto* e = app.add_subcommand("eval", "score a candidate model on benchmark files");
  add_common(e, common);
  add_setting_flags(e, common, kEndpointKeys);
  add_setting_flags(e, common, kExecKeys);
  e->add_option("--benchmark", ev.benchmarks, "benchmark JSONL (repeatable)")->required();
  e->add_option("--completions", ev.completions,
                "score pre-generated {\"id\",\"completion\"} JSONL instead of querying");
  e->add_option("--out", ev.out, "report JSON (default: stdout)");
  e->add_option("--md", ev.md, "markdown table");
  e->add_option("--details", ev.details, "per-problem JSONL with raw booleans and stdout");

  auto* l = app.add_subcommand("loss", "reference SFT/DPO losses for logged log-probs");
  add_common(l, common);
  l->add_option("--input", loss.input, "JSON array, object or JSONL of loss inputs")->required();
  l->add_option("--beta", loss.beta, "beta for records without one")->check(CLI::NonNegativeNumber);
  l->add_flag("--length-normalized", loss.length_normalized,
              "divide sequence log-probs by len_w / len_l");

  auto* a = app.add_subcommand("agree", "agreement rate of two pattern label files");
  add_common(a, common);
  a->add_option("--a", agree.a, "first label file")->required();
  a->add_option("--b", agree.b, "second label file")->required();

  auto* j = app.add_subcommand("judge", "ask the endpoint for pattern decisions only");
  add_common(j, common);
  add_setting_flags(j, common, kEndpointKeys);
  j->add_option("--problems", judge.problems, "problems JSONL")->required();
  j->add_option("--out", judge.out, "labels JSONL (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : common.flag_options) {
      auto slash = key.find('/');
      if (key.substr(0, slash) == chosen->get_name() && opt->count() > 0) {
        std::string k = key.substr(slash + 1);
        flags[k] = common.flag_values[k];
      }
    }
    EnvLookup env = process_env();
    std::optional<fs::path> config_file;
    if (!common.config_path.empty()) config_file = common.config_path;
    Context ctx{resolve_settings(flags, config_file, env), {}, env, out, err, common.dry_run};
    ctx.rc = to_run_config(ctx.settings, env);
    err << "tirforge " << kVersion << " " << chosen->get_name() << "\n"
        << render_settings(ctx.settings, env);

    const std::string name = chosen->get_name();
    if (name == "generate") return cmd_generate(ctx, gen);
    if (name == "build-sft") {
      return cmd_build<SFTExample>(ctx, sft, "sft", [](auto recs, const BuildContext& bc, auto* dec) {
        return build_sft_dataset(recs, bc, dec);
      });
    }
    if (name == "build-dpo") {
      return cmd_build<PreferencePair>(ctx, dpo, "dpo",
                                       [](auto recs, const BuildContext& bc, auto* dec) {
                                         return build_dpo_pairs(recs, bc, dec);
                                       });
    }
    if (name == "eval") return cmd_eval(ctx, ev);
    if (name == "loss") return cmd_loss(ctx, loss);
    if (name == "agree") return cmd_agree(ctx, agree);
    if (name == "judge") return cmd_judge(ctx, judge);
    err << "unhandled subcommand " << name << "\n";
    return kExitUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDataError;
  }
}

}  // namespace tirforge::cli
