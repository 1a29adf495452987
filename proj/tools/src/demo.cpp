#include "demo.hpp"

#include <fstream>
#include <ostream>

#include "sisynth/augmenter.hpp"
#include "sisynth/error.hpp"
#include "sisynth/generation_job.hpp"
#include "sisynth/linear_model.hpp"
#include "sisynth/promptgen.hpp"
#include "sisynth/response_parser.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/split.hpp"

namespace sisynth::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string_view> kContexts = {
    "work has been brutal this quarter",  "my roommate moved out suddenly",
    "school started again last week",     "my dad is back in the hospital",
    "I moved to a new city for a job",    "my girlfriend and I keep arguing",
    "rent went up again",                 "I have been off my meds for a while",
    "my best friend stopped replying",    "the holidays are coming up",
    "I got laid off on friday",           "my grades are slipping",
};

const std::vector<std::vector<std::string_view>> kLevelPhrases = {
    {"honestly I am doing okay and just wanted to vent", "overall I feel pretty stable and my therapist helps",
     "I am looking forward to the weekend with my friends", "things are stressful but I am handling it"},
    {"I feel kind of empty most days but I keep going", "I cry sometimes at night but I know it passes",
     "I am sad a lot lately but I would never hurt myself", "some days are grey and I just sleep through them"},
    {"sometimes I wish I could just disappear for a while", "I keep thinking nobody would care if I was gone",
     "I feel like a burden to everyone around me", "the idea of not existing has been on my mind"},
    {"I have a plan and I think tonight is the night", "I already gave away my things and wrote a note",
     "I bought pills and I do not want to be here anymore", "I am going to end it this week, I am done"},
};

const std::vector<std::string_view> kTails = {
    "", " idk.", " thanks for reading.", " anyway.", " sorry for the long post.", " not sure why I am posting this."};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

nlohmann::json dataset_entry(const Dataset& d, const fs::path& path, const fs::path& root) {
  return {{"name", d.name()},
          {"path", fs::relative(path, root).generic_string()},
          {"schema", to_string(d.schema())},
          {"records", d.size()},
          {"content_hash", d.content_hash()}};
}

}  // namespace

Dataset make_demo_real_corpus(std::size_t users, std::uint64_t seed) {
  Rng rng(mix_seed(seed, "demo-real"));
  const auto schema = LabelSchema::fourclass();
  // Roughly the class balance of a user-labeled forum corpus.
  const double cumulative[] = {0.27, 0.43, 0.75, 1.0};
  const RecordSource source = RealSource{"demo-real"};
  std::vector<TextRecord> records;
  std::set<std::string> seen;
  for (std::size_t u = 0; u < users; ++u) {
    const double r = rng.uniform();
    std::size_t level = 0;
    while (level < 3 && r >= cumulative[level]) ++level;
    const std::size_t posts = 1 + static_cast<std::size_t>(rng.below(4));
    char uid[32];
    std::snprintf(uid, sizeof uid, "u%04zu", u + 1);
    for (std::size_t p = 0; p < posts; ++p) {
      std::size_t shown = level;
      if (rng.uniform() < 0.08) shown = static_cast<std::size_t>(rng.below(4));
      std::string text = std::string(pick(kContexts, rng)) + " and " + std::string(pick(kLevelPhrases[shown], rng)) +
                         std::string(pick(kTails, rng));
      if (!seen.insert(text).second) continue;
      TextRecord rec;
      rec.id = record_id(text, source);
      rec.text = std::move(text);
      rec.label = schema.at(level);
      rec.user_id = uid;
      rec.source = source;
      records.push_back(std::move(rec));
    }
  }
  return Dataset("demo-real", SchemaKind::kFourClass, std::move(records),
                 {{"op", "demo_real_corpus"}, {"users", users}, {"seed", seed}});
}

DemoResult run_demo(const DemoOptions& options, std::ostream& log) {
  const fs::path root = options.out_dir;
  fs::create_directories(root);
  nlohmann::json report = {{"seed", options.seed}, {"requests_per_provider", options.requests}};
  nlohmann::json datasets = nlohmann::json::array();
  const auto save = [&](const Dataset& d, const fs::path& rel) {
    write_dataset(d, root / rel, /*overwrite=*/true);
    datasets.push_back(dataset_entry(d, root / rel, root));
  };

  // Real corpus: four-class, user-level split, then binarized.
  const Dataset real = make_demo_real_corpus(options.real_users, options.seed);
  save(real, "real/demo-real.jsonl");
  SplitSpec split;
  split.seed = options.seed;
  const auto real_split = split_dataset(real, split);
  const Dataset real_train = binarize_dataset(real_split.train);
  const Dataset real_test = binarize_dataset(real_split.test);
  const Dataset real_val = binarize_dataset(real_split.val);
  save(real_train, "real/" + real_train.name() + ".jsonl");
  save(real_test, "real/" + real_test.name() + ".jsonl");
  save(real_val, "real/" + real_val.name() + ".jsonl");
  log << "real corpus: " << real.size() << " posts, split " << real_split.train.size() << "/"
      << real_split.test.size() << "/" << real_split.val.size() << " (train/test/val)\n";

  // Generation and parsing.
  const auto& registry = default_registry();
  PromptSpec spec;
  spec.schema = LabelSchema::binary();
  spec.topic_mode = WithTopics{default_topics()};
  const std::string prompt = render_prompt(spec);
  write_text(root / "prompt.txt", prompt);

  const std::vector<std::pair<std::string, std::string>> providers = {
      {"gpt", "mock-gpt"}, {"flan", "mock-flan"}, {"llama", "mock-llama"}};
  std::vector<Dataset> synthetic;
  nlohmann::json parse_reports = nlohmann::json::object();
  for (const auto& [name, model] : providers) {
    const ChatClient client(mock_profile(name, model));
    const auto job = make_job(to_json(spec), prompt, name, options.requests, mix_seed(options.seed, name),
                              root / "jobs" / name);
    JobOptions jo;
    jo.concurrency = options.concurrency;
    const auto result = run_job(job, client, jo);

    ParseReport total;
    std::vector<ParsedRecord> records;
    for (const auto& c : result.completions) {
      auto parsed = parse_completion(c, spec, registry);
      total.merge(parsed.report);
      for (auto& r : parsed.records) records.push_back(std::move(r));
    }
    Dataset d = records_to_dataset(records, spec, name, name + "-synthetic");
    save(d, "synthetic/" + d.name() + ".jsonl");
    write_text(root / "synthetic" / (name + ".parse_report.json"), to_json(total).dump(2) + "\n");
    parse_reports[name] = to_json(total);
    log << "generated " << name << ": " << total.candidates << " candidates, " << total.accepted << " accepted, "
        << d.size() << " unique\n";
    synthetic.push_back(std::move(d));
  }
  report["parse_reports"] = parse_reports;

  // Synthetic test holdout and training sets.
  auto holdout = holdout_synthetic_test(synthetic, 0.10, options.seed);
  save(holdout.pool, "synthetic/" + holdout.pool.name() + ".jsonl");
  std::vector<Dataset> train_sets;
  for (auto& rem : holdout.remainders) {
    rem = rem.with_name(rem.name() + "-train");
    save(rem, "synthetic/" + rem.name() + ".jsonl");
    train_sets.push_back(rem);
  }
  const Dataset mixed = compose_mix(holdout.remainders, "synthetic-mix-train");
  save(mixed, "synthetic/" + mixed.name() + ".jsonl");
  train_sets.push_back(mixed);
  train_sets.push_back(real_train);
  const std::vector<Dataset> test_sets = {real_test, holdout.pool};

  TrainConfig tc;
  tc.seed = options.seed;
  BaselineTrainer trainer(tc);
  DemoResult out;
  out.matrix = evaluate_matrix(train_sets, test_sets, trainer);
  out.matrix_csv = root / "eval" / "matrix.csv";
  write_text(out.matrix_csv, render_csv(out.matrix));
  write_text(root / "eval" / "matrix.txt", render_text(out.matrix));
  write_text(root / "eval" / "matrix.json", to_json(out.matrix).dump(2) + "\n");
  log << render_text(out.matrix);
  report["eval_matrix"] = "eval/matrix.csv";

  if (options.sweep) {
    AugmentationPlan plan;
    plan.seed = options.seed;
    const double baseline = out.matrix.at(train_sets.size() - 1, 0).f1(plan.f1_variant);
    const auto sweep = run_sweep(plan, mixed, real_train, test_sets, trainer, baseline);
    write_text(root / "augment" / "sweep.json", to_json(sweep).dump(2) + "\n");
    write_text(root / "augment" / "sweep.txt", render_text(sweep));
    log << render_text(sweep);
    report["sweep"] = {{"path", "augment/sweep.json"},
                       {"baseline_f1", baseline},
                       {"stop_rate", sweep.stop_rate ? nlohmann::json(*sweep.stop_rate) : nlohmann::json(nullptr)}};
  }

  report["datasets"] = datasets;
  out.report = report;
  write_text(root / "report.json", report.dump(2) + "\n");
  return out;
}

}  // namespace sisynth::cli
