#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <unistd.h>

#include "stoic/pdb_ingest.hpp"

using namespace stoic;
using namespace stoic::pdb;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = STOIC_FIXTURES;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

class CountingTransport : public Transport {
 public:
  explicit CountingTransport(std::map<std::string, HttpResponse> canned) : canned_(std::move(canned)) {}
  HttpResponse send(const HttpRequest& request) override {
    std::lock_guard lock(mu_);
    ++calls;
    const auto it = canned_.find(request.url);
    if (it == canned_.end()) throw Error(ErrorCode::Network, "offline");
    return it->second;
  }
  int calls = 0;

 private:
  std::mutex mu_;
  std::map<std::string, HttpResponse> canned_;
};

FetchedEntry entry(std::string id, std::string seq) { return FetchedEntry{std::move(id), std::move(seq), {}}; }

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stoic_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("search query documents") {
  const auto q60 = build_search_query(60, "Icosahedral");
  const auto doc = nlohmann::json::parse(q60.document);
  CHECK(doc["return_type"] == "polymer_entity");
  const auto& nodes = doc["query"]["nodes"];
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0]["parameters"]["attribute"] == Endpoints{}.chain_count_attribute);
  CHECK(nodes[0]["parameters"]["value"] == 60);
  CHECK(nodes[1]["parameters"]["attribute"] == Endpoints{}.symmetry_attribute);
  CHECK(nodes[1]["parameters"]["value"] == "Icosahedral");

  const auto q180 = build_search_query(180, "Icosahedral");
  CHECK(nlohmann::json::parse(q180.document)["query"]["nodes"][0]["parameters"]["value"] == 180);
  CHECK(code_of([] { build_search_query(0, "Icosahedral"); }) == ErrorCode::BadChainCount);
  CHECK(code_of([] { build_search_query(-60, "Icosahedral"); }) == ErrorCode::BadChainCount);

  const auto paged = nlohmann::json::parse(paged_document(q60, 200, 100));
  CHECK(paged["request_options"]["paginate"]["start"] == 200);
  CHECK(paged["request_options"]["paginate"]["rows"] == 100);
}

TEST_CASE("request keys are stable and body sensitive") {
  const HttpRequest get{"GET", "https://www.rcsb.org/fasta/entity/1ABC_1", ""};
  CHECK(request_key(get) == "GET_www.rcsb.org_fasta_entity_1ABC_1");
  const HttpRequest a{"POST", "https://x.org/q", "{\"a\":1}"};
  const HttpRequest b{"POST", "https://x.org/q", "{\"a\":2}"};
  CHECK(request_key(a) != request_key(b));
  CHECK(request_key(a) == request_key(a));
  CHECK(request_key(a).size() == std::string("POST_x.org_q_").size() + 16);
}

TEST_CASE("recording format round trip") {
  const HttpResponse r{404, "line one\nline two"};
  const auto back = parse_recording(format_recording(r));
  CHECK(back.status == 404);
  CHECK(back.body == r.body);
  CHECK_THROWS_AS(parse_recording("garbage"), Error);
}

TEST_CASE("fixture search with 3 hits") {
  FixtureTransport t(kFixtures / "basic");
  const auto ids = fetch_entry_ids(build_search_query(60, "Icosahedral"), t);
  CHECK(ids == std::vector<std::string>{"1AAA_1", "1BBB_1", "1CCC_1"});
}

TEST_CASE("fixture search with duplicate ids") {
  FixtureTransport t(kFixtures / "basic");
  const auto ids = fetch_entry_ids(build_search_query(180, "Icosahedral"), t);
  CHECK(ids == std::vector<std::string>{"2AAA_1", "2BBB_1"});
}

TEST_CASE("fixture search across pages") {
  FixtureTransport t(kFixtures / "paging");
  Endpoints ep;
  ep.page_rows = 2;
  const auto ids = fetch_entry_ids(build_search_query(60, "Icosahedral"), t, ep);
  CHECK(ids == std::vector<std::string>{"3AAA_1", "3BBB_1", "3CCC_1", "3DDD_1"});
}

TEST_CASE("fixture error paths") {
  FixtureTransport t(kFixtures / "errors");
  try {
    fetch_entry_ids(build_search_query(60, "Icosahedral"), t);
    FAIL("expected HttpStatusError");
  } catch (const HttpStatusError& e) {
    CHECK(e.code() == ErrorCode::HttpStatus);
    CHECK(e.status() == 500);
  }
  CHECK(fetch_entry_ids(build_search_query(180, "Icosahedral"), t).empty());
  CHECK(code_of([&] { fetch_entry_ids(build_search_query(120, "Icosahedral"), t); }) == ErrorCode::MalformedResponse);
  CHECK(code_of([&] { fetch_sequence("9NOH_1", t); }) == ErrorCode::BadFasta);
  CHECK(code_of([&] { fetch_sequence("9EMP_1", t); }) == ErrorCode::BadFasta);
  CHECK(code_of([&] { fetch_sequence("9SYM_1", t); }) == ErrorCode::BadSymbol);
  try {
    fetch_sequence("9GON_1", t);
    FAIL("expected HttpStatusError");
  } catch (const HttpStatusError& e) {
    CHECK(e.status() == 404);
  }
  CHECK(code_of([&] { fetch_sequence("0XXX_1", t); }) == ErrorCode::Network);
  CHECK(code_of([] { FixtureTransport missing(kFixtures / "does-not-exist"); }) == ErrorCode::Io);
}

TEST_CASE("fasta parsing") {
  CHECK(parse_fasta_sequence(">2MS2_1|Chain A\nMASNF\nTQFVL") == "MASNFTQFVL");
  CHECK(parse_fasta_sequence(">x\r\nmas nf\r\n") == "MASNF");
  CHECK(parse_fasta_sequence(">a\nGAV\n>b\nKKK\n") == "GAV");
  CHECK(code_of([] { parse_fasta_sequence("MASNF\n"); }) == ErrorCode::BadFasta);
  CHECK(code_of([] { parse_fasta_sequence(">only header\n"); }) == ErrorCode::BadFasta);
  CHECK(code_of([] { parse_fasta_sequence(""); }) == ErrorCode::BadFasta);
  CHECK(code_of([] { parse_fasta_sequence(">a\nMJS\n"); }) == ErrorCode::BadSymbol);
}

TEST_CASE("fixture sequences: lower-case body accepted") {
  FixtureTransport t(kFixtures / "basic");
  CHECK(fetch_sequence("1BBB_1", t).sequence == "MKTAYIAKQRQISFVK");
  const auto all = fetch_sequences({"1CCC_1", "1AAA_1", "1BBB_1"}, t, 2);
  REQUIRE(all.size() == 3);
  CHECK(all[0].id == "1AAA_1");
  CHECK(all[2].id == "1CCC_1");
}

TEST_CASE("assemble corpus") {
  // Two of three share a sequence.
  const auto ds = assemble_corpus({entry("a", "MASNF"), entry("b", "GAVLI"), entry("c", "MASNF")},
                                  {entry("x", "KRHKR"), entry("y", "DEDEE")}, 2);
  CHECK(ds.size() == 4);
  CHECK(ds.count(StoichiometryClass::Sixty) == 2);
  CHECK(ds.max_length() == 5);

  CHECK(code_of([] {
          assemble_corpus({entry("a", "MASNF"), entry("c", "MASNF")}, {entry("x", "KRH"), entry("y", "DDE")}, 2);
        }) == ErrorCode::InsufficientUnique);
  // A sequence claimed by both classes is dropped from both.
  CHECK(code_of([] {
          assemble_corpus({entry("a", "MASNF"), entry("b", "GGG")}, {entry("x", "MASNF"), entry("y", "DDE")}, 2);
        }) == ErrorCode::InsufficientUnique);
  CHECK(code_of([] { assemble_corpus({}, {entry("x", "KRH")}, 1); }) == ErrorCode::Empty);
  CHECK(code_of([] { assemble_corpus({entry("a", "G")}, {entry("x", "KRH")}, 0); }) == ErrorCode::BadConfig);
}

TEST_CASE("assemble corpus: output order does not depend on input order") {
  std::vector<FetchedEntry> a{entry("b", "GAVLI"), entry("a", "MASNF"), entry("c", "WWWW")};
  std::vector<FetchedEntry> b{entry("y", "DEDEE"), entry("x", "KRHKR")};
  const auto one = assemble_corpus(a, b, 2);
  std::reverse(a.begin(), a.end());
  std::reverse(b.begin(), b.end());
  CHECK(assemble_corpus(a, b, 2) == one);
  CHECK(one[0].id == "a");
}

TEST_CASE("caching transport stores successes and replays offline") {
  const auto dir = scratch_dir("cache");
  const std::string url = "https://www.rcsb.org/fasta/entity/5ABC_1";
  auto inner = std::make_unique<CountingTransport>(std::map<std::string, HttpResponse>{
      {url, {200, ">5ABC_1\nGAV\n"}}, {"https://www.rcsb.org/fasta/entity/5BAD_1", {503, "busy"}}});
  auto* counter = inner.get();
  CachingTransport cache(std::move(inner), dir);
  CHECK(fetch_sequence("5ABC_1", cache).sequence == "GAV");
  CHECK(fetch_sequence("5ABC_1", cache).sequence == "GAV");
  CHECK(counter->calls == 1);
  CHECK_THROWS_AS(fetch_sequence("5BAD_1", cache), HttpStatusError);
  CHECK_THROWS_AS(fetch_sequence("5BAD_1", cache), HttpStatusError);
  CHECK(counter->calls == 3);

  // The cache directory doubles as a fixture directory.
  FixtureTransport replay(dir);
  CHECK(fetch_sequence("5ABC_1", replay).sequence == "GAV");
  fs::remove_all(dir);
}
