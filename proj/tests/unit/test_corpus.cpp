#include <functional>
#include <doctest.h>

#include <filesystem>

#include "trustconv/corpus.hpp"
#include "trustconv/error.hpp"

using namespace trustconv;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

std::string one_scale(const std::string& id, const std::string& extra = "") {
  return R"({"scale_id":")" + id +
         R"(","name":"n","year":2000,"citations":10,"domain":"automation","construct":"situational",)" + extra +
         R"("items":[{"item_id":"i01","text":"the system is suspicious","valence":"negative"}]})";
}

Scale make_scale(std::string id, Domain d, Construct c, long long citations = 1) {
  return {std::move(id), "name", 2000, citations, d, c, {{"i01", "The system is reliable", Valence::Positive}}};
}

}  // namespace

TEST_CASE("parse a one-scale corpus") {
  ScaleCorpus c = parse_corpus(R"({"scales":[)" + one_scale("jian2000") + "]}");
  REQUIRE(c.scales.size() == 1);
  CHECK(c.scales[0].items.size() == 1);
  CHECK(c.scales[0].domain == Domain::Automation);
  CHECK(c.scales[0].items[0].valence == Valence::Negative);
  CHECK(c.find("jian2000") == &c.scales[0]);
  CHECK(c.find("nope") == nullptr);
}

TEST_CASE("corpus load errors") {
  CHECK(code_of([] { parse_corpus(""); }) == ErrorCode::MissingScales);
  CHECK(code_of([] { parse_corpus("  \n"); }) == ErrorCode::MissingScales);
  CHECK(code_of([] { parse_corpus(R"({"scales":[]})"); }) == ErrorCode::MissingScales);
  CHECK(code_of([] { parse_corpus("{\"scales\": [\n{oops"); }) == ErrorCode::MalformedRecord);
  CHECK(code_of([] {
          parse_corpus(R"({"scales":[)" + one_scale("jian2000") + "," + one_scale("jian2000") + "]}");
        }) == ErrorCode::DuplicateId);
}

TEST_CASE("unknown enum strings are hard errors") {
  std::string bad = R"({"scales":[{"scale_id":"x","name":"n","year":1,"citations":1,"domain":"robots",)"
                    R"("construct":"situational","items":[{"item_id":"a","text":"t","valence":"neutral"}]}]})";
  try {
    parse_corpus(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRecord);
    CHECK(std::string(e.what()).find("domain") != std::string::npos);
  }
}

TEST_CASE("validate_corpus reports each broken invariant") {
  ScaleCorpus c{{make_scale("a", Domain::Automation, Construct::Situational),
                 make_scale("b", Domain::Human, Construct::Dispositional),
                 make_scale("c", Domain::ECommerce, Construct::HistoryBased)},
                ""};
  CHECK(validate_corpus(c).empty());

  ScaleCorpus empty_items = c;
  empty_items.scales[1].items.clear();
  auto v = validate_corpus(empty_items);
  REQUIRE(v.size() == 1);
  CHECK(v[0].scale_id == "b");
  CHECK(v[0].rule == "items non-empty");

  ScaleCorpus negative = c;
  negative.scales[0].citations = -5;
  v = validate_corpus(negative);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "citations");
  CHECK(v[0].rule == "citations ≥ 0");
}

TEST_CASE("filter_scales") {
  const ScaleCorpus& c = bundled_corpus();
  ScaleCorpus autos = filter_scales(c, Domain::Automation, std::nullopt);
  CHECK(!autos.scales.empty());
  CHECK(autos.scales.size() < c.scales.size());
  for (const auto& s : autos.scales) CHECK(s.domain == Domain::Automation);
  CHECK(filter_scales(c, std::nullopt, std::nullopt) == c);
  CHECK(filter_scales(autos, Domain::Automation, std::nullopt) == autos);

  ScaleCorpus dispositional{{make_scale("a", Domain::Automation, Construct::Dispositional)}, ""};
  CHECK(filter_scales(dispositional, std::nullopt, Construct::Situational).scales.empty());
}

TEST_CASE("bundled corpus meets the mini-corpus floor") {
  const ScaleCorpus& c = bundled_corpus();
  CHECK(validate_corpus(c).empty());
  auto autos = filter_scales(c, Domain::Automation, std::nullopt);
  CHECK(autos.scales.size() >= 9);
  CHECK(filter_scales(c, Domain::Automation, Construct::Situational).scales.size() >= 3);
}

TEST_CASE("save then load round-trips") {
  auto dir = std::filesystem::temp_directory_path() / "trustconv_corpus_rt";
  std::filesystem::create_directories(dir);
  auto path = dir / "corpus.json";
  save_corpus(bundled_corpus(), path);
  CHECK(load_corpus(path) == bundled_corpus());
  CHECK(parse_corpus(serialize_corpus(bundled_corpus())) == bundled_corpus());
  std::filesystem::remove_all(dir);
}
