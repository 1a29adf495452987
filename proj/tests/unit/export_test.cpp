#include <gtest/gtest.h>

#include "sisynth/error.hpp"
#include "sisynth/export.hpp"
#include "test_support.hpp"

namespace sisynth {
namespace {

using testing::make_dataset;
using testing::slurp;

TEST(Export, WritesBundleAndRoundTrips) {
  testing::TempDir dir;
  const auto train = make_dataset("mix-train", SchemaKind::kBinary, 6, "train");
  const auto val = make_dataset("real-val", SchemaKind::kBinary, 3, "val");
  const auto bundle = export_for_finetune(train, val, dir.path());
  EXPECT_EQ(bundle.train_file.filename(), "train.jsonl");

  const auto first = nlohmann::json::parse(slurp(bundle.train_file).substr(0, slurp(bundle.train_file).find('\n')));
  EXPECT_EQ(first.size(), 3u);
  EXPECT_EQ(first.at("label"), "NonSuicidal");
  EXPECT_EQ(first.at("id"), train.records()[0].id);

  const auto cfg = nlohmann::json::parse(slurp(bundle.config_file));
  EXPECT_EQ(cfg.at("learning_rate"), 2e-5);
  EXPECT_EQ(cfg.at("batch_size"), 4);
  EXPECT_EQ(cfg.at("dropout"), 0.1);
  EXPECT_EQ(cfg.at("max_sequence_length"), 512);
  EXPECT_EQ(cfg.at("labels"), (nlohmann::json{"NonSuicidal", "Suicidal"}));

  const auto back = import_finetune_bundle(dir.path());
  EXPECT_EQ(back.train.size(), 6u);
  EXPECT_EQ(back.val.size(), 3u);
  EXPECT_EQ(back.train.content_hash(), train.content_hash());
  EXPECT_EQ(back.val.content_hash(), val.content_hash());
}

TEST(Export, SchemaMismatchRejected) {
  testing::TempDir dir;
  try {
    export_for_finetune(make_dataset("a", SchemaKind::kBinary, 2), make_dataset("b", SchemaKind::kFourClass, 4),
                        dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExport);
  }
}

}  // namespace
}  // namespace sisynth
