#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>

#include "demo.hpp"
#include "pipeline_config.hpp"
#include "sisynth/annotation.hpp"
#include "sisynth/annotation_server.hpp"
#include "sisynth/augmenter.hpp"
#include "sisynth/error.hpp"
#include "sisynth/eval.hpp"
#include "sisynth/export.hpp"
#include "sisynth/generation_job.hpp"
#include "sisynth/linear_model.hpp"
#include "sisynth/promptgen.hpp"
#include "sisynth/response_parser.hpp"
#include "sisynth/split.hpp"
#include "sisynth/taxonomy.hpp"

namespace sisynth::cli {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::kInput, p.string() + " does not exist");
}

void refuse_in_place(const fs::path& in, const fs::path& out) {
  std::error_code ec;
  if (fs::exists(out) && fs::equivalent(in, out, ec)) {
    throw Error(ErrorCode::kInput, "refusing to overwrite input " + in.string() + " in place");
  }
}

Dataset load(const fs::path& p) {
  require_exists(p);
  return read_dataset(p);
}

TopicRegistry registry_from(const std::string& path) {
  return path.empty() ? default_registry() : TopicRegistry::load(path);
}

struct PromptArgs {
  std::string spec_file;
  std::string config_file;
  std::string schema = "binary";
  std::string topics = "default";
  std::size_t count = 10;
  std::size_t shots = 0;
  std::string exemplars;
  std::string criteria;
  std::string taxonomy;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--spec", spec_file, "Prompt spec JSON file");
    cmd->add_option("--config", config_file, "Pipeline config; its prompt_spec is used");
    cmd->add_option("--schema", schema, "binary or fourclass")->check(CLI::IsMember({"binary", "fourclass"}));
    cmd->add_option("--topics", topics, "'default', 'none' or comma-separated topic ids");
    cmd->add_option("--count", count, "Texts requested when no topics are given");
    cmd->add_option("--shots", shots, "Exemplars per class (0 = zero-shot)");
    cmd->add_option("--exemplars", exemplars, "Dataset to draw few-shot exemplars from");
    cmd->add_option("--criteria", criteria, "JSON object of label -> criterion text");
    cmd->add_option("--taxonomy", taxonomy, "Topic registry JSON (default: built-in)");
    cmd->add_option("--seed", seed, "Exemplar selection seed");
  }

  PromptSpec spec(const TopicRegistry& registry) const {
    if (!spec_file.empty()) return prompt_spec_from_json(read_json(spec_file), registry);
    if (!config_file.empty()) return prompt_spec_from_json(load_config(config_file).prompt_spec, registry);
    nlohmann::json j = {{"schema", schema}};
    if (topics == "none") {
      j["instance_count"] = count;
    } else if (topics == "default") {
      j["topics"] = "default";
    } else {
      nlohmann::json ids = nlohmann::json::array();
      std::size_t start = 0;
      while (start <= topics.size()) {
        const auto comma = std::min(topics.find(',', start), topics.size());
        if (comma > start) ids.push_back(topics.substr(start, comma - start));
        start = comma + 1;
      }
      j["topics"] = ids;
    }
    if (shots > 0) {
      j["shot_mode"] = "few_shot";
      j["exemplars_per_class"] = shots;
    }
    PromptSpec spec = prompt_spec_from_json(j, registry);
    if (!criteria.empty()) spec.schema = spec.schema.with_criteria(load_criteria_file(criteria));
    return spec;
  }

  std::string render(const PromptSpec& spec) const {
    if (spec.shot_mode() == ShotMode::kZeroShot) return render_prompt(spec);
    if (exemplars.empty()) throw Error(ErrorCode::kInvalidSpec, "few-shot prompts need --exemplars");
    const auto k = std::get<FewShot>(spec.shot).exemplars_per_class;
    const auto picks = select_exemplars(load(exemplars), k, seed);
    return render_prompt(spec, picks);
  }
};

void print_manifest(std::ostream& out, const DatasetManifest& m) {
  out << m.name << " (" << to_string(m.schema) << "): " << m.record_count << " records";
  if (m.user_count > 0) out << ", " << m.user_count << " users";
  out << "\n";
  for (const auto& c : m.class_distribution) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-14s %6zu  %6.2f%%", std::string(label_display_name(c.label)).c_str(), c.count,
                  c.percent);
    out << buf;
    if (m.user_count > 0) out << "  users " << c.users;
    out << "\n";
  }
  out << "  content hash " << m.content_hash << "\n";
}


}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic suicidal-ideation dataset pipeline", "sisynth"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::function<void()> action;
  const auto on = [&action](CLI::App* cmd, std::function<void()> fn) {
    cmd->callback([&action, fn = std::move(fn)] { action = fn; });
  };

  // topics
  auto* topics = app.add_subcommand("topics", "Topic registry");
  topics->require_subcommand(1);
  auto* topics_list = topics->add_subcommand("list", "List topics");
  std::string taxonomy_file;
  bool topics_json = false;
  topics_list->add_option("--taxonomy", taxonomy_file, "Topic registry JSON (default: built-in)");
  topics_list->add_flag("--json", topics_json, "Print JSON");
  on(topics_list, [&] {
    const auto reg = registry_from(taxonomy_file);
    if (topics_json) {
      out << nlohmann::json(reg.topics()).dump(2) << "\n";
      return;
    }
    for (std::size_t i = 0; i < reg.topics().size(); ++i) {
      const auto& t = reg.topics()[i];
      out << i + 1 << ". " << t.display_name << " [" << t.id << "]\n";
    }
  });

  // prompt render
  auto* prompt = app.add_subcommand("prompt", "Prompt construction");
  prompt->require_subcommand(1);
  auto* prompt_render = prompt->add_subcommand("render", "Render a generation prompt");
  PromptArgs pargs;
  std::string prompt_out;
  pargs.add_to(prompt_render);
  prompt_render->add_option("-o,--out", prompt_out, "Write the prompt here instead of stdout");
  on(prompt_render, [&] {
    const auto reg = registry_from(pargs.taxonomy);
    const auto text = pargs.render(pargs.spec(reg));
    if (prompt_out.empty()) {
      out << text;
    } else {
      write_text(prompt_out, text);
      out << "wrote " << prompt_out << " (sha256 " << prompt_hash(text) << ")\n";
    }
  });

  // generate
  auto* generate = app.add_subcommand("generate", "Send a prompt to a provider N times");
  PromptArgs gargs;
  std::string gen_provider;
  std::string gen_out;
  std::size_t gen_requests = 0;
  std::size_t gen_concurrency = 4;
  std::optional<std::uint64_t> gen_seed;
  bool gen_mock = false;
  std::string gen_model = "mock-gpt";
  gargs.add_to(generate);
  generate->add_option("--provider", gen_provider, "Provider name from the config (default: the active one)");
  generate->add_flag("--mock", gen_mock, "Use the offline mock provider");
  generate->add_option("--model", gen_model, "Model id for --mock");
  generate->add_option("--requests", gen_requests, "Number of requests");
  generate->add_option("--concurrency", gen_concurrency, "Requests in flight");
  generate->add_option("--job-seed", gen_seed, "Job seed");
  generate->add_option("--out", gen_out, "Job directory");
  on(generate, [&] {
    const auto reg = registry_from(gargs.taxonomy);
    std::optional<PipelineConfig> cfg;
    if (!gargs.config_file.empty()) cfg = load_config(gargs.config_file);
    ProviderProfile profile;
    if (gen_mock) {
      profile = mock_profile(gen_provider.empty() ? "mock" : gen_provider, gen_model);
    } else {
      if (!cfg) throw Error(ErrorCode::kConfig, "generate needs --config with providers, or --mock");
      profile = cfg->provider(gen_provider);
    }
    const auto spec = gargs.spec(reg);
    const auto text = gargs.render(spec);
    const std::size_t n = gen_requests > 0 ? gen_requests : (cfg ? cfg->requests : 10);
    const std::uint64_t seed = gen_seed.value_or(cfg ? cfg->seed : 0);
    fs::path dir = gen_out;
    if (dir.empty()) dir = (cfg ? cfg->output_dir : fs::path("out")) / "jobs" / profile.name;
    const auto job = make_job(to_json(spec), text, profile.name, n, seed, dir);
    JobOptions jo;
    jo.concurrency = gen_concurrency;
    const auto result = run_job(job, ChatClient(profile), jo);
    out << "job " << job.job_id << ": " << result.completions.size() << "/" << n << " completions in "
        << dir.string() << " (" << result.requested.size() << " requested now)\n";
  });

  // parse
  auto* parse = app.add_subcommand("parse", "Parse a job's completions into a dataset");
  std::string parse_job;
  std::string parse_out;
  std::string parse_name;
  std::string parse_taxonomy;
  std::size_t parse_min = ParseOptions{}.min_text_length;
  bool parse_force = false;
  parse->add_option("--job", parse_job, "Job directory")->required();
  parse->add_option("--out", parse_out, "Dataset JSONL to write")->required();
  parse->add_option("--name", parse_name, "Dataset name (default: file stem)");
  parse->add_option("--taxonomy", parse_taxonomy, "Topic registry JSON (default: built-in)");
  parse->add_option("--min-length", parse_min, "Minimum text length in code points");
  parse->add_flag("--force", parse_force, "Overwrite existing output");
  on(parse, [&] {
    const auto reg = registry_from(parse_taxonomy);
    const auto job = load_job(parse_job);
    const auto spec = prompt_spec_from_json(job.prompt_spec, reg);
    ParseReport total;
    std::vector<ParsedRecord> records;
    for (const auto& c : load_completions(parse_job)) {
      auto r = parse_completion(c, spec, reg, ParseOptions{parse_min});
      total.merge(r.report);
      for (auto& rec : r.records) records.push_back(std::move(rec));
    }
    const fs::path dst = parse_out;
    const auto d = records_to_dataset(records, spec, job.provider,
                                      parse_name.empty() ? dst.stem().string() : parse_name);
    write_dataset(d, dst, parse_force);
    auto report_path = dst;
    report_path.replace_extension(".parse_report.json");
    write_text(report_path, to_json(total).dump(2) + "\n");
    out << to_json(total).dump(2) << "\n" << d.size() << " records written to " << dst.string() << "\n";
  });

  // dataset ...
  auto* dataset = app.add_subcommand("dataset", "Dataset operations");
  dataset->require_subcommand(1);

  auto* ds_ingest = dataset->add_subcommand("ingest", "Normalize an external JSONL corpus");
  std::string ing_in, ing_out, ing_schema = "fourclass", ing_corpus, ing_name;
  bool ing_force = false;
  ds_ingest->add_option("--in", ing_in, "Raw JSONL ({text, label, user_id?, topic?})")->required();
  ds_ingest->add_option("--out", ing_out, "Normalized dataset JSONL")->required();
  ds_ingest->add_option("--schema", ing_schema)->check(CLI::IsMember({"binary", "fourclass"}));
  ds_ingest->add_option("--corpus", ing_corpus, "Corpus name recorded as provenance")->required();
  ds_ingest->add_option("--name", ing_name, "Dataset name");
  ds_ingest->add_flag("--force", ing_force, "Overwrite existing output");
  on(ds_ingest, [&] {
    require_exists(ing_in);
    refuse_in_place(ing_in, ing_out);
    auto r = normalize_ingest(ing_in, RealSource{ing_corpus}, parse_schema_kind(ing_schema),
                              ing_name.empty() ? fs::path(ing_out).stem().string() : ing_name);
    write_dataset(r.dataset, ing_out, ing_force);
    print_manifest(out, r.manifest);
    out << r.duplicates_removed << " duplicates removed\n";
  });

  auto* ds_split = dataset->add_subcommand("split", "Train/test/val split");
  std::string sp_in, sp_out, sp_config, sp_unit = "auto";
  SplitSpec sp;
  bool sp_force = false;
  ds_split->add_option("--in", sp_in)->required();
  ds_split->add_option("--out-dir", sp_out)->required();
  ds_split->add_option("--config", sp_config, "Take the split spec from this pipeline config");
  ds_split->add_option("--train", sp.train);
  ds_split->add_option("--test", sp.test);
  ds_split->add_option("--val", sp.val);
  ds_split->add_option("--seed", sp.seed);
  ds_split->add_option("--unit", sp_unit)->check(CLI::IsMember({"auto", "by_user", "by_record"}));
  ds_split->add_flag("--force", sp_force, "Overwrite existing output");
  on(ds_split, [&] {
    SplitSpec spec = sp;
    if (!sp_config.empty()) spec = load_config(sp_config).split;
    else spec.unit = parse_split_unit(sp_unit);
    const auto d = load(sp_in);
    const auto r = split_dataset(d, spec);
    for (const Dataset* part : {&r.train, &r.test, &r.val}) {
      const auto dst = fs::path(sp_out) / (part->name() + ".jsonl");
      refuse_in_place(sp_in, dst);
      write_dataset(*part, dst, sp_force);
      print_manifest(out, compute_manifest(*part));
    }
  });

  auto* ds_bin = dataset->add_subcommand("binarize", "Map four-class labels to binary");
  std::string bin_in, bin_out;
  bool bin_force = false;
  ds_bin->add_option("--in", bin_in)->required();
  ds_bin->add_option("--out", bin_out)->required();
  ds_bin->add_flag("--force", bin_force, "Overwrite existing output");
  on(ds_bin, [&] {
    refuse_in_place(bin_in, bin_out);
    const auto d = binarize_dataset(load(bin_in));
    write_dataset(d, bin_out, bin_force);
    print_manifest(out, compute_manifest(d));
  });

  auto* ds_mix = dataset->add_subcommand("mix", "Concatenate datasets with disjoint ids");
  std::vector<std::string> mix_in;
  std::string mix_out, mix_name;
  bool mix_force = false;
  ds_mix->add_option("--in", mix_in)->required()->expected(1, -1);
  ds_mix->add_option("--out", mix_out)->required();
  ds_mix->add_option("--name", mix_name);
  ds_mix->add_flag("--force", mix_force, "Overwrite existing output");
  on(ds_mix, [&] {
    std::vector<Dataset> parts;
    for (const auto& p : mix_in) {
      refuse_in_place(p, mix_out);
      parts.push_back(load(p));
    }
    const auto d = compose_mix(parts, mix_name.empty() ? fs::path(mix_out).stem().string() : mix_name);
    write_dataset(d, mix_out, mix_force);
    print_manifest(out, compute_manifest(d));
  });

  auto* ds_hold = dataset->add_subcommand("holdout", "Stratified synthetic test holdout");
  std::vector<std::string> hold_in;
  std::string hold_out, hold_name = "synthetic-test";
  double hold_fraction = 0.10;
  std::uint64_t hold_seed = 0;
  bool hold_force = false;
  ds_hold->add_option("--in", hold_in)->required()->expected(1, -1);
  ds_hold->add_option("--out-dir", hold_out)->required();
  ds_hold->add_option("--fraction", hold_fraction);
  ds_hold->add_option("--seed", hold_seed);
  ds_hold->add_option("--name", hold_name, "Name of the pooled test set");
  ds_hold->add_flag("--force", hold_force, "Overwrite existing output");
  on(ds_hold, [&] {
    std::vector<Dataset> parts;
    for (const auto& p : hold_in) parts.push_back(load(p));
    auto r = holdout_synthetic_test(parts, hold_fraction, hold_seed, hold_name);
    write_dataset(r.pool, fs::path(hold_out) / (r.pool.name() + ".jsonl"), hold_force);
    print_manifest(out, compute_manifest(r.pool));
    for (std::size_t i = 0; i < r.remainders.size(); ++i) {
      const auto dst = fs::path(hold_out) / (r.remainders[i].name() + "-train.jsonl");
      refuse_in_place(hold_in[i], dst);
      write_dataset(r.remainders[i].with_name(r.remainders[i].name() + "-train"), dst, hold_force);
    }
  });

  auto* ds_stats = dataset->add_subcommand("stats", "Print a dataset manifest");
  std::string stats_in;
  bool stats_json = false;
  ds_stats->add_option("--in", stats_in)->required();
  ds_stats->add_flag("--json", stats_json);
  on(ds_stats, [&] {
    const auto m = compute_manifest(load(stats_in));
    if (stats_json) out << to_json(m).dump(2) << "\n";
    else print_manifest(out, m);
  });

  // train
  auto* train = app.add_subcommand("train", "Train the baseline classifier");
  std::string train_in, train_out, train_config;
  TrainConfig tc;
  std::size_t max_vocab = kDefaultMaxVocabulary;
  train->add_option("--train", train_in)->required();
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--config", train_config, "Take trainer settings from this pipeline config");
  train->add_option("--learning-rate", tc.learning_rate);
  train->add_option("--epochs", tc.epochs);
  train->add_option("--l2", tc.l2);
  train->add_option("--batch-size", tc.batch_size);
  train->add_option("--seed", tc.seed);
  train->add_option("--max-vocabulary", max_vocab);
  on(train, [&] {
    const TrainConfig cfg = train_config.empty() ? tc : load_config(train_config).trainer;
    const auto model = BaselineTrainer(cfg, max_vocab).fit(load(train_in));
    model.save(train_out);
    out << "vocabulary " << model.features().dimension() << ", classes " << model.weights().classes();
    if (!model.epoch_loss().empty()) {
      out << ", loss " << model.epoch_loss().front() << " -> " << model.epoch_loss().back();
    }
    out << "\nwrote " << train_out << "\n";
  });

  // eval matrix
  auto* eval = app.add_subcommand("eval", "Evaluation");
  eval->require_subcommand(1);
  auto* eval_matrix = eval->add_subcommand("matrix", "Train on each train set, score on each test set");
  std::vector<std::string> em_train, em_test;
  std::string em_out, em_config;
  std::size_t em_workers = 1;
  eval_matrix->add_option("--train", em_train)->required()->expected(1, -1);
  eval_matrix->add_option("--test", em_test)->required()->expected(1, -1);
  eval_matrix->add_option("--out-dir", em_out)->required();
  eval_matrix->add_option("--config", em_config, "Take trainer settings from this pipeline config");
  eval_matrix->add_option("--workers", em_workers, "Rows trained in parallel");
  on(eval_matrix, [&] {
    std::vector<Dataset> trs, tes;
    for (const auto& p : em_train) trs.push_back(load(p));
    for (const auto& p : em_test) tes.push_back(load(p));
    BaselineTrainer trainer(em_config.empty() ? TrainConfig{} : load_config(em_config).trainer);
    const auto m = evaluate_matrix(trs, tes, trainer, MatrixOptions{em_workers});
    write_text(fs::path(em_out) / "matrix.csv", render_csv(m));
    write_text(fs::path(em_out) / "matrix.txt", render_text(m));
    write_text(fs::path(em_out) / "matrix.json", to_json(m).dump(2) + "\n");
    out << render_text(m);
  });

  // augment sweep
  auto* augment = app.add_subcommand("augment", "Augmentation");
  augment->require_subcommand(1);
  auto* sweep = augment->add_subcommand("sweep", "Mix real folds into synthetic data over a rate sweep");
  std::string sw_syn, sw_real, sw_out, sw_config, sw_variant = "positive";
  std::vector<std::string> sw_test;
  AugmentationPlan plan;
  double sw_baseline = 0.0;
  sweep->add_option("--synthetic", sw_syn)->required();
  sweep->add_option("--real-train", sw_real)->required();
  sweep->add_option("--test", sw_test, "Test sets; the first is primary")->required()->expected(1, -1);
  sweep->add_option("--rates", plan.rates)->expected(1, -1);
  sweep->add_option("--folds", plan.folds);
  sweep->add_option("--seed", plan.seed);
  sweep->add_option("--baseline-f1", sw_baseline)->required();
  sweep->add_option("--f1", sw_variant)->check(CLI::IsMember({"positive", "macro", "weighted"}));
  sweep->add_option("--config", sw_config, "Take plan and trainer settings from this pipeline config");
  sweep->add_option("--out-dir", sw_out)->required();
  on(sweep, [&] {
    AugmentationPlan p = plan;
    TrainConfig t;
    if (!sw_config.empty()) {
      const auto cfg = load_config(sw_config);
      p = cfg.augmentation;
      t = cfg.trainer;
    } else {
      p.f1_variant = parse_f1_variant(sw_variant);
    }
    std::vector<Dataset> tests;
    for (const auto& path : sw_test) tests.push_back(load(path));
    BaselineTrainer trainer(t);
    try {
      const auto r = run_sweep(p, load(sw_syn), load(sw_real), tests, trainer, sw_baseline);
      write_text(fs::path(sw_out) / "sweep.json", to_json(r).dump(2) + "\n");
      write_text(fs::path(sw_out) / "sweep.txt", render_text(r));
      out << render_text(r);
    } catch (const SweepAborted& e) {
      write_text(fs::path(sw_out) / "sweep.partial.json", to_json(e.partial()).dump(2) + "\n");
      throw;
    }
  });

  // export finetune
  auto* exp = app.add_subcommand("export", "Export bundles");
  exp->require_subcommand(1);
  auto* finetune = exp->add_subcommand("finetune", "Write an encoder fine-tuning bundle");
  std::string ft_train, ft_val, ft_out;
  finetune->add_option("--train", ft_train)->required();
  finetune->add_option("--val", ft_val)->required();
  finetune->add_option("--out-dir", ft_out)->required();
  on(finetune, [&] {
    const auto b = export_for_finetune(load(ft_train), load(ft_val), ft_out);
    out << "wrote " << b.train_file.string() << ", " << b.val_file.string() << ", " << b.config_file.string() << "\n";
  });

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Dual-annotator adjudication");
  annotate->require_subcommand(1);
  std::string ann_state = "annotation-state";
  auto* ann_open = annotate->add_subcommand("open", "Open a session over a dataset");
  std::string ann_in, ann_a, ann_b;
  ann_open->add_option("--in", ann_in)->required();
  ann_open->add_option("--annotator-a", ann_a)->required();
  ann_open->add_option("--annotator-b", ann_b)->required();
  ann_open->add_option("--state", ann_state, "Session state directory");
  on(ann_open, [&] {
    AnnotationService service{fs::path(ann_state)};
    const auto id = service.open_session(load(ann_in), ann_a, ann_b);
    out << id << "\n";
  });
  auto* ann_serve = annotate->add_subcommand("serve", "Serve the annotation HTTP API");
  std::string ann_host = "127.0.0.1";
  int ann_port = 8080;
  ann_serve->add_option("--state", ann_state, "Session state directory");
  ann_serve->add_option("--host", ann_host);
  ann_serve->add_option("--port", ann_port);
  on(ann_serve, [&] {
    AnnotationService service{fs::path(ann_state)};
    AnnotationServer server(service);
    const int port = server.bind(ann_host, ann_port);
    out << "listening on http://" << ann_host << ":" << port << "\n" << std::flush;
    server.listen();
  });
  auto* ann_report = annotate->add_subcommand("report", "Agreement statistics of a finished session");
  std::string ann_session;
  ann_report->add_option("--state", ann_state, "Session state directory");
  ann_report->add_option("--session", ann_session)->required();
  on(ann_report, [&] {
    AnnotationService service{fs::path(ann_state)};
    out << to_json(service.report(ann_session)).dump(2) << "\n";
  });

  // report
  auto* report = app.add_subcommand("report", "Summarize the artifacts in an output directory");
  std::string rep_dir;
  report->add_option("--dir", rep_dir)->required();
  on(report, [&] {
    require_exists(rep_dir);
    std::vector<fs::path> manifests;
    for (const auto& e : fs::recursive_directory_iterator(rep_dir)) {
      if (e.path().filename().string().ends_with(".manifest.json")) manifests.push_back(e.path());
    }
    std::sort(manifests.begin(), manifests.end());
    for (const auto& m : manifests) {
      const auto j = read_json(m);
      out << fs::relative(m, rep_dir).generic_string() << ": " << j.value("name", "") << ", "
          << j.value("record_count", 0) << " records, " << j.value("schema", "") << "\n";
    }
    for (const char* rel : {"eval/matrix.txt", "augment/sweep.txt"}) {
      const auto p = fs::path(rep_dir) / rel;
      if (!fs::exists(p)) continue;
      std::ifstream in(p);
      out << "\n" << rel << "\n" << in.rdbuf();
    }
  });

  // demo
  auto* demo = app.add_subcommand("demo", "End-to-end run");
  bool demo_offline = false;
  DemoOptions dopt;
  bool demo_no_sweep = false;
  demo->add_flag("--offline", demo_offline, "Use mock providers only (required)");
  demo->add_option("--out", dopt.out_dir, "Output directory");
  demo->add_option("--seed", dopt.seed);
  demo->add_option("--requests", dopt.requests, "Requests per provider");
  demo->add_flag("--no-sweep", demo_no_sweep, "Skip the augmentation sweep");
  on(demo, [&] {
    if (!demo_offline) throw CLI::ValidationError("demo", "only --offline is supported");
    dopt.sweep = !demo_no_sweep;
    const auto r = run_demo(dopt, out);
    out << "eval matrix: " << r.matrix_csv.string() << "\n";
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace sisynth::cli
