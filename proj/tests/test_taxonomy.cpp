// Copyright 2026 The maskfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <random>

#include "maskfuse/error.hpp"
#include "maskfuse/taxonomy.hpp"
#include "oracles.hpp"

using namespace maskfuse;

namespace
{

template <typename Fn>
ErrorCode code_of(Fn && fn)
{
  try {
    fn();
  } catch (const Error & e) {
    return e.code();
  }
  ADD_FAILURE() << "no maskfuse::Error thrown";
  return ErrorCode::kIoError;
}

// 4x1 strip: ids left to right.
SemanticMap strip(const std::string & tax, std::vector<ClassId> ids)
{
  Grid<ClassId> g(static_cast<std::uint32_t>(ids.size()), 1);
  for (std::uint32_t x = 0; x < ids.size(); ++x) g.at(x, 0) = ids[x];
  return SemanticMap(tax, g);
}

BinaryMask strip_mask(std::uint32_t width, std::uint32_t from, std::uint32_t to)
{
  // width x 1 grid: column-major index == x
  RunCounts c{from, to - from};
  if (to < width) c.push_back(width - to);
  return BinaryMask("m", width, 1, c, 1.0);
}

}  // namespace

TEST(Taxonomy, NormalizesAndValidates)
{
  const Taxonomy t("coco", {"road", " Car ", "person"});
  EXPECT_EQ(t.find("CAR"), ClassId{1});
  EXPECT_EQ(t.find("  road"), ClassId{0});
  EXPECT_FALSE(t.contains("zebra crossing"));
  EXPECT_EQ(code_of([] { Taxonomy("t", {}); }), ErrorCode::kInvalidTaxonomy);
  EXPECT_EQ(code_of([] { Taxonomy("t", {"car", "Car"}); }), ErrorCode::kInvalidTaxonomy);
  EXPECT_EQ(code_of([] { Taxonomy("t", {"car", "  "}); }), ErrorCode::kInvalidTaxonomy);
  EXPECT_EQ(code_of([] { Taxonomy("t", {"unidentified"}); }), ErrorCode::kInvalidTaxonomy);
  EXPECT_EQ(code_of([] { Taxonomy("t", std::vector<std::string>(256, "x")); }),
    ErrorCode::kInvalidTaxonomy);
}

TEST(SemanticMap, ValidateChecksTaxonomyAndIds)
{
  const Taxonomy t("coco", {"road", "car"});
  EXPECT_NO_THROW(strip("coco", {0, 1, kVoidId}).validate(t));
  EXPECT_EQ(code_of([&] { strip("ade", {0}).validate(t); }), ErrorCode::kTaxonomyMismatch);
  EXPECT_EQ(code_of([&] { strip("coco", {0, 2}).validate(t); }), ErrorCode::kInvalidLabel);
}

TEST(MajorityVote, HandCountedExamples)
{
  const Taxonomy t("coco", {"road", "car"});
  const auto v = majority_vote(strip_mask(4, 0, 4), strip("coco", {1, 1, 1, 0}), t);
  EXPECT_EQ(v.label_text, "car");
  EXPECT_EQ(v.label_id, 1);
  EXPECT_DOUBLE_EQ(v.confidence, 0.75);
  EXPECT_EQ(v.source_taxonomy, "coco");

  const auto u = majority_vote(strip_mask(4, 1, 3), strip("coco", {0, 1, 1, 0}), t);
  EXPECT_EQ(u.label_text, "car");
  EXPECT_DOUBLE_EQ(u.confidence, 1.0);

  // tie goes to the smaller id whichever order the pixels appear in
  const auto tie = majority_vote(strip_mask(2, 0, 2), strip("coco", {1, 0}), t);
  EXPECT_EQ(tie.label_id, 0);
  EXPECT_DOUBLE_EQ(tie.confidence, 0.5);
}

TEST(MajorityVote, VoidIsIgnoredAndAllVoidThrows)
{
  const Taxonomy t("coco", {"road", "car"});
  const auto v = majority_vote(strip_mask(4, 0, 4), strip("coco", {kVoidId, kVoidId, kVoidId, 1}), t);
  EXPECT_EQ(v.label_id, 1);
  EXPECT_DOUBLE_EQ(v.confidence, 1.0);
  const auto all_void = strip("coco", {kVoidId, kVoidId, 0, 0});
  EXPECT_EQ(code_of([&] { majority_vote(strip_mask(4, 0, 2), all_void, t); }), ErrorCode::kAllVoid);
  EXPECT_FALSE(try_majority_vote(strip_mask(4, 0, 2), all_void, t).has_value());
  EXPECT_EQ(code_of([&] { majority_vote(strip_mask(3, 0, 2), all_void, t); }),
    ErrorCode::kDimensionMismatch);
}

TEST(MajorityVote, MatchesHistogramOracle)
{
  std::mt19937_64 rng(23);
  const Taxonomy t("t", {"a", "b", "c", "d", "e"});
  for (int i = 0; i < 300; ++i) {
    Grid<ClassId> g(32, 32);
    // few classes and some void so ties and AllVoid both happen
    std::uniform_int_distribution<int> cls(0, 5);
    for (auto & c : g.data()) {
      const int k = cls(rng);
      c = k == 5 ? kVoidId : ClassId(k % 3);
    }
    const auto px = oracle::random_nonempty(rng, 32, 32);
    const auto expected = oracle::vote(px, g);
    const auto got = try_majority_vote(oracle::make_mask("m", px), SemanticMap("t", g), t);
    ASSERT_EQ(got.has_value(), expected.has_value());
    if (got) {
      ASSERT_EQ(got->label_id, expected->id);
      ASSERT_NEAR(got->confidence, expected->confidence, 1e-12);
      ASSERT_EQ(got->label_text, t.name(expected->id));
    }
  }
}

TEST(VoteAll, TwoMapsGiveTwoVotesPerMask)
{
  const Taxonomy coco("coco", {"road", "car"});
  const Taxonomy ade("ade", {"road", "minivan", "building"});
  Grid<ClassId> gc(10, 10, 1), ga(10, 10, 1);
  const SemanticMap mc("coco", gc), ma("ade", ga);
  std::vector<BinaryMask> masks;
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    masks.push_back(oracle::make_mask("m" + std::to_string(i), oracle::random_nonempty(rng, 10, 10)));
  }
  const MaskSet set("img", 10, 10, masks);
  const std::vector<ClosedSetSource> sources{{&mc, &coco}, {&ma, &ade}};
  const auto votes = vote_all(set, sources);
  ASSERT_EQ(votes.size(), 100u);
  for (const auto & per_mask : votes) {
    ASSERT_EQ(per_mask.size(), 2u);
    EXPECT_EQ(per_mask[0].label_text, "car");
    EXPECT_EQ(per_mask[0].source_taxonomy, "coco");
    EXPECT_EQ(per_mask[1].label_text, "minivan");
    EXPECT_EQ(per_mask[1].source_taxonomy, "ade");
  }
}

TEST(VoteAll, SingleMapEqualsMappedVote)
{
  const Taxonomy t("t", {"a", "b", "c"});
  std::mt19937_64 rng(31);
  Grid<ClassId> g(12, 9);
  for (auto & c : g.data()) c = ClassId(std::uniform_int_distribution<int>(0, 2)(rng));
  const SemanticMap map("t", g);
  std::vector<BinaryMask> masks;
  for (int i = 0; i < 20; ++i) {
    masks.push_back(oracle::make_mask("m" + std::to_string(i), oracle::random_nonempty(rng, 12, 9)));
  }
  const MaskSet set("img", 12, 9, masks);
  const std::vector<ClosedSetSource> sources{{&map, &t}};
  const auto votes = vote_all(set, sources);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    ASSERT_EQ(votes[i].size(), 1u);
    EXPECT_EQ(votes[i][0], majority_vote(masks[i], map, t));
  }
}

TEST(VoteAll, AllVoidVotesAreOmitted)
{
  const Taxonomy t("t", {"a"});
  const SemanticMap empty("t", Grid<ClassId>(2, 2, kVoidId));
  const SemanticMap full("t", Grid<ClassId>(2, 2, 0));
  const MaskSet set("img", 2, 2, {BinaryMask("m", 2, 2, {0, 4}, 1)});
  const std::vector<ClosedSetSource> sources{{&empty, &t}, {&full, &t}};
  const auto votes = vote_all(set, sources);
  ASSERT_EQ(votes[0].size(), 1u);
  EXPECT_EQ(votes[0][0].label_text, "a");
}
