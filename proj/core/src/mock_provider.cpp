#include "sisynth/mock_provider.hpp"

#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "sisynth/hashing.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/text.hpp"

namespace sisynth {
namespace {

struct TopicPhrases {
  std::string_view key;
  std::vector<std::string_view> openers;
};

const std::vector<TopicPhrases>& topic_bank() {
  static const std::vector<TopicPhrases> bank = {
      {"depression", {"Every morning feels heavy and grey since the depression came back",
                      "I have been depressed for months and nothing feels interesting anymore"}},
      {"anxiety", {"My anxiety keeps me awake with my heart racing every night",
                   "The constant worry and panic attacks make it hard to leave the house"}},
      {"hopelessness", {"I feel like my future is empty and nothing will ever change",
                        "It seems pointless to plan anything because nothing works out"}},
      {"anger", {"I snapped at everyone again today and the rage will not go away",
                 "I am so angry at myself and at the people who hurt me"}},
      {"perfectionism", {"I got a B and all I can think about is how I failed",
                         "Nothing I do is ever good enough for my own standards"}},
      {"familyissues", {"My parents fight every night and I am stuck in the middle",
                        "Home stopped feeling safe after the constant yelling with my family"}},
      {"relationshipproblems", {"My partner left me last week without an explanation",
                                "The breakup keeps replaying in my head every single day"}},
      {"unemployment", {"I lost my job three months ago and every application gets rejected",
                        "Being unemployed makes me feel useless to everyone"}},
      {"financialcrisis", {"The debt keeps piling up and I cannot pay rent this month",
                           "I lost all my savings and the bills keep coming"}},
      {"education", {"My exams are next week and I am failing two classes",
                     "The pressure at university is crushing and my grades keep dropping"}},
      {"beingbullied", {"The kids at school keep posting cruel things about me online",
                        "I get mocked and pushed around every day in the hallway"}},
      {"deathofclosedone", {"Since my brother died the house feels unbearably quiet",
                            "I still cannot accept that my best friend is gone"}},
      {"immigration", {"Since moving to this country I feel like a stranger everywhere",
                       "I left my whole family behind when I immigrated and I am alone"}},
      {"racism", {"People at work keep making comments about my race",
                  "I was treated like a criminal again today because of the color of my skin"}},
  };
  return bank;
}

// Severity buckets: 0 none, 1 low, 2 moderate, 3 high.
const std::vector<std::string_view>& core_phrases(int bucket) {
  static const std::vector<std::vector<std::string_view>> bank = {
      {"but talking with a friend helped and I feel calmer now",
       "yet I am coping, going to therapy and things are slowly improving",
       "but I have good support around me and I am hopeful about next month",
       "still, I went for a run, called my sister and felt relieved afterwards"},
      {"and I feel worn down, although I know this rough patch will pass",
       "and I am tired and sad most days, but I still look forward to seeing my friends",
       "and it is hard, though I would never act on these bad days"},
      {"and some nights I wonder whether anyone would notice if I disappeared",
       "and the thought of not waking up keeps coming back more often",
       "and I have started to feel like a burden who might be better off gone"},
      {"and I have decided I want to end my life and have been planning how",
       "and I wrote goodbye letters because I cannot go on like this anymore",
       "and tonight I plan to kill myself since there is no way out",
       "and I keep thinking everyone would be better off if I were dead"},
  };
  return bank.at(static_cast<std::size_t>(bucket));
}

const std::vector<std::string_view>& generic_openers() {
  static const std::vector<std::string_view> bank = {
      "Life has been a lot lately", "I do not really know how to say this",
      "Things have been strange these past weeks", "I have been thinking about everything today"};
  return bank;
}

int bucket_for(std::size_t level, std::size_t levels) {
  if (levels <= 2) return level == 0 ? 0 : 3;
  return static_cast<int>(std::min<std::size_t>(3, level));
}

std::string label_spelling(const std::string& display, Rng& rng) {
  const double r = rng.uniform();
  if (r < 0.85) return display;
  if (r < 0.93) {
    std::string s = to_lower_ascii(display);
    for (auto& c : s) {
      if (c == ' ') c = '-';
    }
    return s;
  }
  std::string s = display;
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

double noise_for(std::string_view model_id) {
  const std::string m = to_lower_ascii(model_id);
  if (m.find("flan") != std::string::npos) return 0.22;
  if (m.find("llama") != std::string::npos) return 0.15;
  return 0.06;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

}  // namespace

std::string synthesize_mock_response(std::string_view prompt, std::string_view model_id, std::uint64_t seed) {
  Rng rng(mix_seed(seed, sha256_hex(prompt) + std::string(model_id)));

  std::vector<std::string> topics;
  std::vector<std::string> levels;
  std::size_t count = 0;
  static const std::regex topic_line(R"(^\s+\d+-(.+?)\s*$)");
  static const std::regex level_line(R"(Risk Level=([^:]+):)");
  static const std::regex count_line(R"(generate (\d+) suicidal texts)");
  std::istringstream lines{std::string(prompt)};
  std::string line;
  bool in_examples = false;
  while (std::getline(lines, line)) {
    std::smatch m;
    if (line.rfind("Example ", 0) == 0) in_examples = true;
    if (line.rfind("Your task", 0) == 0) in_examples = false;
    if (!in_examples && std::regex_match(line, m, topic_line)) topics.push_back(m[1]);
    if (std::regex_search(line, m, level_line)) levels.push_back(m[1]);
    if (std::regex_search(line, m, count_line)) count = std::stoul(m[1]);
  }
  if (levels.empty()) levels = {"Non Suicidal", "Suicidal"};

  const bool topic_mode = !topics.empty();
  const double noise = noise_for(model_id) + (topic_mode ? 0.0 : 0.10);
  const std::string label_key = rng.uniform() < 0.1 ? "risk_level" : "risk level";

  nlohmann::json records = nlohmann::json::array();
  auto emit = [&](const std::string& topic, std::size_t level) {
    std::size_t voiced = level;
    if (rng.uniform() < noise) voiced = static_cast<std::size_t>(rng.below(levels.size()));
    std::string opener;
    if (topic_mode) {
      const std::string key = fold_key(topic);
      const TopicPhrases* found = nullptr;
      for (const auto& t : topic_bank()) {
        if (t.key == key) found = &t;
      }
      opener = found ? std::string(pick(found->openers, rng))
                     : "Lately everything about " + to_lower_ascii(topic) + " has been weighing on me";
    } else {
      opener = std::string(pick(generic_openers(), rng));
    }
    std::string text = opener + ", " + std::string(pick(core_phrases(bucket_for(voiced, levels.size())), rng)) + ".";
    records.push_back({{"text", text}, {"topic", topic}, {label_key, label_spelling(levels[level], rng)}});
  };
  if (topic_mode) {
    for (const auto& topic : topics) {
      for (std::size_t level = 0; level < levels.size(); ++level) emit(topic, level);
    }
  } else {
    static const std::vector<std::string> themes = {"life", "stress", "loneliness", "work", "school"};
    for (std::size_t i = 0; i < std::max<std::size_t>(count, 1); ++i) {
      emit(pick(themes, rng), static_cast<std::size_t>(rng.below(levels.size())));
    }
  }
  if (rng.uniform() < 0.05) records.push_back({{"text", "N/A"}, {"topic", ""}, {label_key, levels.back()}});

  const double style = rng.uniform();
  if (style < 0.55) return records.dump(2);
  if (style < 0.75) return "Here are the generated texts:\n\n```json\n" + records.dump(2) + "\n```\n";
  if (style < 0.87) return "Sure! Below is the JSON you asked for.\n" + records.dump() + "\nLet me know if you need more.";
  return nlohmann::json{{"data", records}}.dump(2);
}

MockProvider::MockProvider(std::filesystem::path fixtures_dir) : fixtures_dir_(std::move(fixtures_dir)) {}

void MockProvider::add_fixture(const std::string& prompt_hash, std::string content) {
  std::lock_guard lock(mutex_);
  fixtures_[prompt_hash] = std::move(content);
}

HttpResponse MockProvider::post(const HttpRequest& request) {
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(request.body);
  } catch (const nlohmann::json::parse_error&) {
    return {400, R"({"error":{"message":"request body is not JSON"}})", {}};
  }
  if (!body.contains("messages") || !body["messages"].is_array() || body["messages"].empty()) {
    return {400, R"({"error":{"message":"messages required"}})", {}};
  }
  const std::string prompt = body["messages"].back().value("content", std::string{});
  const std::string model = body.value("model", std::string("mock"));
  const std::uint64_t seed = body.value("seed", std::uint64_t{0});
  const std::string hash = sha256_hex(prompt);

  std::optional<std::string> content;
  {
    std::lock_guard lock(mutex_);
    if (auto it = fixtures_.find(hash); it != fixtures_.end()) content = it->second;
  }
  if (!content && !fixtures_dir_.empty()) {
    std::ifstream in(fixtures_dir_ / (hash + ".txt"), std::ios::binary);
    if (in) content = std::string(std::istreambuf_iterator<char>(in), {});
  }
  if (!content) content = synthesize_mock_response(prompt, model, seed);

  const auto prompt_tokens = static_cast<long long>(prompt.size() / 4);
  const auto completion_tokens = static_cast<long long>(content->size() / 4);
  nlohmann::json envelope = {
      {"id", "mock-" + hash.substr(0, 12)},
      {"object", "chat.completion"},
      {"model", model},
      {"choices", nlohmann::json::array({{{"index", 0},
                                          {"message", {{"role", "assistant"}, {"content", *content}}},
                                          {"finish_reason", "stop"}}})},
      {"usage",
       {{"prompt_tokens", prompt_tokens},
        {"completion_tokens", completion_tokens},
        {"total_tokens", prompt_tokens + completion_tokens}}}};
  return {200, envelope.dump(), {}};
}

}  // namespace sisynth
