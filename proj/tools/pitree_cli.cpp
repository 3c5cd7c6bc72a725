/****************************************************************************
 * Command line front end: build trees from declarative configs, materialize
 * and export them, run invariant suites, and evaluate rises.
 *
 * Exit codes: 0 all checks pass, 1 a violation was found, 2 config or usage
 * error, 3 the only blemish is an inconclusive check.
 ****************************************************************************/

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pitree/export.hpp"
#include "pitree/hybrid.hpp"

using namespace pitree;

namespace {

bool verbose() {
  const char* e = std::getenv("PITREE_LOG");
  return e && *e;
}

void note(const std::string& s) {
  if (verbose()) std::cerr << "pitree: " << s << "\n";
}

Json loadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in " + path);
  return j;
}

// deterministic samples when no sample file is given: shallow nodes picked
// at random, their leaves as neighborhoods, a point sampled inside each
std::vector<GrowsIntoSample> generatedSamples(const FoliageTree& t, uint64_t count,
                                              uint64_t seed) {
  std::mt19937 rng((uint32_t)seed);
  std::vector<GrowsIntoSample> out;
  for (uint64_t i = 0; i < count; ++i) {
    NodePath v;
    uint64_t k = 1 + rng() % 3;
    for (uint64_t j = 0; j < k; ++j) v.push_back(rng() % 3);
    ClopenSet u = t.leafAt(v);
    // walk down until the leaf is a plain set: interior nodes of a rescale
    // block carry sons-union leaves that later heights cannot be compared to
    for (int step = 0; step < 8 && u.kind() == ClopenSet::Kind::SonsUnion; ++step) {
      v.push_back(0);
      u = t.leafAt(v);
    }
    out.push_back({samplePoint(u), u});
  }
  return out;
}

std::vector<GrowsIntoSample> acquireSamples(const FoliageTree& t,
                                            const std::string& samplesArg,
                                            uint64_t seed) {
  if (samplesArg.empty()) return generatedSamples(t, 5, seed);
  if (samplesArg.find_first_not_of("0123456789") == std::string::npos)
    return generatedSamples(t, std::stoull(samplesArg), seed);
  return samplesFromJson(t.space(), loadJson(samplesArg));
}

int runSuite(const std::string& suite, const Json& term, uint64_t depth, uint64_t sons,
             const std::string& samplesArg, uint64_t seed) {
  Report rep;
  if (suite == "hybrid-oracle") {
    // the finite calculus against its transitive-closure oracle
    std::mt19937 rng((uint32_t)seed);
    detail::CheckAgg agg("sons-formula-vs-closure", "(c)");
    for (int i = 0; i < 100; ++i) {
      auto [host, fam] = randomOracleInstance(rng);
      auto bad = oracleMismatch(host, fam);
      agg.note(bad ? CheckStatus::Fail : CheckStatus::Pass,
               bad ? Json{{"instance", i}, {"detail", *bad}} : Json::object());
    }
    agg.intoReport(rep);
  } else if (suite == "baire") {
    TreePtr t = buildTree(term);
    rep = baireFoliageSuite(*t, depth, sons);
  } else if (suite == "grows-into") {
    TreePtr t = buildTree(term);
    rep = growsIntoSuite(*t, acquireSamples(*t, samplesArg, seed), depth);
  } else if (suite == "fip") {
    TreePtr t = buildTree(term);
    auto samples = acquireSamples(*t, samplesArg, seed);
    std::vector<RiseSet> rises;
    Json used = Json::array();
    for (const auto& s : samples) {
      rises.push_back(rise(*t, s.point, s.nbhd, depth));
      used.push_back(rises.back().toJson());
    }
    rep = fipCheck(rises);
    rep.add("rises", "(♣)", CheckStatus::Pass, Json{{"sets", used}});
  } else if (suite == "theorem2") {
    // stage-level checks on a pipeline term: the meeting-images condition
    // on the shifted certificates, then per-component rises
    PipelineResult parts = pipelinePartsFromTerm(term);
    std::vector<FilterCert> certs;
    for (const auto& c : term.at("pipeline").at("components"))
      certs.push_back(FilterCert::fromJson(c.at("cert")));
    ClubReport club = checkClubCondition(parts.shift, certs);
    Json cw{{"bound", club.bound}, {"minCommon", club.minCommon},
            {"choices", club.entries.size()}};
    if (!club.pass)
      for (const auto& e : club.entries)
        if (e.common.size() < club.minCommon) {
          cw["pick"] = e.pick;
          cw["common"] = e.common;
          break;
        }
    rep.add("meeting-images", "(♣)", club.pass ? CheckStatus::Pass : CheckStatus::Fail,
            std::move(cw));
    for (size_t n = 0; n < parts.rescaled.size(); ++n) {
      Report comp = growsIntoSuite(*parts.rescaled[n],
                                   generatedSamples(*parts.rescaled[n], 3, seed + n),
                                   depth);
      for (auto& c : comp.checks) c.id = "comp" + std::to_string(n) + "/" + c.id;
      rep.absorb(std::move(comp));
    }
  } else {
    throw ConfigError("unknown suite: " + suite);
  }
  std::cout << rep.toJson().dump(2) << "\n";
  note("suite " + suite + " finished with exit code " +
       std::to_string(rep.exitCode()));
  return rep.exitCode();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pi-tree construction and verification tool"};
  app.require_subcommand(1);

  std::string config, format = "jsonl", suite = "baire", samplesArg, pointArg, nbhdArg;
  uint64_t depth = 0, sons = 0, seed = 0;

  CLI::App* build = app.add_subcommand("build", "materialize a tree and export it");
  build->add_option("--config", config)->required();
  build->add_option("--depth", depth)->default_val(3);
  build->add_option("--sons", sons)->default_val(4);
  build->add_option("--format", format)->check(CLI::IsMember({"jsonl", "dot"}));

  CLI::App* check = app.add_subcommand("check", "run an invariant suite");
  check->add_option("--config", config)->required();
  check->add_option("--suite", suite)
      ->check(CLI::IsMember({"baire", "grows-into", "fip", "hybrid-oracle", "theorem2"}));
  check->add_option("--depth", depth)->default_val(6);
  check->add_option("--sons", sons)->default_val(32);
  check->add_option("--samples", samplesArg, "sample count or path to a samples file");
  check->add_option("--seed", seed)->default_val(0);

  CLI::App* riseCmd = app.add_subcommand("rise", "evaluate a rise set");
  riseCmd->add_option("--config", config)->required();
  riseCmd->add_option("--point", pointArg)->required();
  riseCmd->add_option("--nbhd", nbhdArg)->required();
  riseCmd->add_option("--depth", depth)->default_val(6);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) {
      Json term = loadJson(config);
      note("building " + term.dump());
      TreePtr t = buildTree(term);
      StaticTree st = canonicalize(*t, depth, sons);
      std::cout << (format == "dot" ? exportDot(st) : exportJsonl(st));
      return 0;
    }
    if (check->parsed()) {
      Json term = loadJson(config);
      return runSuite(suite, term, depth, sons, samplesArg, seed);
    }
    // rise
    Json term = loadJson(config);
    TreePtr t = buildTree(term);
    Json pj = Json::parse(pointArg, nullptr, false);
    Json nj = Json::parse(nbhdArg, nullptr, false);
    if (pj.is_discarded() || nj.is_discarded())
      throw ConfigError("point and neighborhood must be JSON");
    Point p = pointFromJson(pj);
    ClopenSet u = setFromJson(t->space(), nj);
    RiseSet rs = rise(*t, p, u, depth);
    std::cout << rs.toJson().dump(2) << "\n";
    return 0;
  } catch (const PitreeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
