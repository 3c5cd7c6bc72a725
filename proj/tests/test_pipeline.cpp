#include <gtest/gtest.h>

#include "pitree/export.hpp"

using namespace pitree;

namespace {

FilterCert ladder(uint64_t upTo) {
  return FilterCert::fromJson(Json{{"ladder", Json{{"upTo", upTo}}}});
}

}  // namespace

TEST(Pipeline, TwoSorgenfreyComponentsComeOutCertified) {
  std::vector<PipelineComponent> comps{{sorgenfreyTree(), ladder(8)},
                                       {sorgenfreyTree(), ladder(8)}};
  PipelineResult parts = theorem2PipelineParts(comps);
  ASSERT_EQ(parts.rescaled.size(), 2u);
  EXPECT_TRUE(parts.product->certified());

  // the two reindexing maps land on 2n+1 and 2n+3, so images of any pair of
  // certificate sets share all large enough odd numbers
  std::vector<FilterCert> delta{ladder(8), ladder(8)};
  ClubReport club = checkClubCondition(parts.shift, delta, 100, 3);
  EXPECT_TRUE(club.pass);

  Report rep = baireFoliageSuite(*parts.product, 4, 6);
  EXPECT_EQ(rep.exitCode(), 0) << rep.toJson().dump(2);
}

TEST(Pipeline, MixedComponentsPassTheSuite) {
  std::vector<PipelineComponent> comps{{standardTree(), ladder(6)},
                                       {sorgenfreyTree(), ladder(6)}};
  TreePtr t = theorem2Pipeline(comps);
  Report rep = baireFoliageSuite(*t, 4, 6);
  EXPECT_EQ(rep.exitCode(), 0) << rep.toJson().dump(2);
}

TEST(Pipeline, NeedsAtLeastTwoComponents) {
  std::vector<PipelineComponent> one{{sorgenfreyTree(), ladder(3)}};
  EXPECT_THROW(theorem2PipelineParts(one), LambdaTooSmall);
  EXPECT_THROW(theorem2PipelineParts({}), LambdaTooSmall);
}

TEST(Config, TermsRebuildTheTreesTheyDescribe) {
  std::vector<Json> terms{
      Json{{"standard", Json::object()}},
      Json{{"sorgenfrey", Json::object()}},
      Json::parse(
          R"({"product":{"lambda":2,"components":[{"sorgenfrey":{}},{"standard":{}}]}})"),
      Json::parse(R"({"product":{"lambda":"omega","components":[{"sorgenfrey":{}}]}})"),
      Json::parse(R"({"rescale":{"base":{"standard":{}},"alpha":{"affine2np1":{}}}})"),
      Json::parse(
          R"({"cocountable":{"base":{"sorgenfrey":{}},"points":[{"sorg":"0"}]}})"),
  };
  for (const Json& t : terms) EXPECT_EQ(buildTree(t)->term(), t) << t.dump();
}

TEST(Config, PipelineTermsBuildTheirProduct) {
  Json term = Json::parse(R"({"pipeline":{"components":[
      {"tree":{"sorgenfrey":{}},"cert":{"ladder":{"upTo":4}}},
      {"tree":{"sorgenfrey":{}},"cert":{"ladder":{"upTo":4}}}]}})");
  TreePtr t = buildTree(term);
  EXPECT_TRUE(t->term().contains("product"));
  PipelineResult parts = pipelinePartsFromTerm(term);
  EXPECT_EQ(parts.product->term(), t->term());
}

TEST(Config, MalformedTermsAreRejected) {
  EXPECT_THROW(buildTree(Json{{"mystery", Json::object()}}), ConfigError);
  EXPECT_THROW(buildTree(Json::parse(R"({"product":{"components":[]}})")), ConfigError);
  EXPECT_THROW(
      buildTree(Json::parse(R"({"product":{"lambda":"aleph1","components":[]}})")),
      ConfigError);
  EXPECT_THROW(buildTree(Json::array()), ConfigError);
  EXPECT_THROW(pipelinePartsFromTerm(Json{{"standard", Json::object()}}), ConfigError);
}

TEST(Config, SamplesParseAgainstTheSpace) {
  Json j = Json::parse(
      R"([{"point":{"sorg":"1/3"},"nbhd":{"sorgIv":{"lo":"0","hi":"1"}}}])");
  auto samples = samplesFromJson(Space::sorg(), j);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_TRUE(member(samples[0].point, samples[0].nbhd));
  EXPECT_THROW(samplesFromJson(Space::sorg(), Json::object()), ConfigError);
}

TEST(Export, JsonlRoundTripIsByteIdentical) {
  StaticTree st = canonicalize(*standardTree(), 3, 2);
  std::string text = exportJsonl(st);
  StaticTree back = importJsonl(text);
  EXPECT_EQ(back.nodes.size(), st.nodes.size());
  EXPECT_EQ(exportJsonl(back), text);
}

TEST(Export, LazyLeavesRefuseReimport) {
  // interior nodes of a rescale block only describe their leaves relative to
  // the base family, so the exported text names sets the importer cannot build
  auto h = rescaleTree(standardTree(), AlphaMap::affine2np1());
  std::string text = exportJsonl(canonicalize(*h, 3, 2));
  EXPECT_THROW(importJsonl(text), ConfigError);
}

TEST(Export, DotListsNodesAndEllipses) {
  StaticTree st = canonicalize(*standardTree(), 2, 2);
  std::string dot = exportDot(st);
  EXPECT_NE(dot.find("digraph pitree"), std::string::npos);
  EXPECT_NE(dot.find("n0 -> n"), std::string::npos);
  EXPECT_NE(dot.find("_rest"), std::string::npos);
}
