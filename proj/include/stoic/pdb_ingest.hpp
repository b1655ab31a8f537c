#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "stoic/dataset.hpp"

namespace stoic::pdb {

/// Service endpoints and attribute names. The RCSB schema evolves; these are
/// the names current for the v2 search API.
struct Endpoints {
  std::string search_url = "https://search.rcsb.org/rcsbsearch/v2/query";
  std::string fasta_url = "https://www.rcsb.org/fasta/entity/";  // + polymer entity id
  std::string chain_count_attribute = "rcsb_assembly_info.polymer_entity_instance_count";
  std::string symmetry_attribute = "rcsb_struct_symmetry.type";
  std::size_t page_rows = 100;
};

struct HttpRequest {
  std::string method;  // GET or POST
  std::string url;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws Error(Network) when no response could be obtained.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// Stable file name for a request: method, sanitized URL and, for requests
/// with a body, the FNV-1a hash of that body.
std::string request_key(const HttpRequest& request);

/// Serves recorded responses from `<dir>/<request_key>.resp`. A recording
/// is a status line "HTTP <code>" followed by the raw body.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(std::filesystem::path dir);
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::filesystem::path dir_;
};

/// Wraps another transport and stores successful responses in a cache
/// directory using the fixture format.
class CachingTransport : public Transport {
 public:
  CachingTransport(std::unique_ptr<Transport> inner, std::filesystem::path dir);
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::unique_ptr<Transport> inner_;
  std::filesystem::path dir_;
};

/// Live HTTPS transport. Throws Error(Network) when built without TLS support.
std::unique_ptr<Transport> make_http_transport();

std::string format_recording(const HttpResponse& response);
HttpResponse parse_recording(const std::string& text);

struct SearchQuery {
  int chain_count = 0;
  std::string symmetry;
  std::string document;  // JSON without pagination options
};

/// Throws BadChainCount for chain_count <= 0.
SearchQuery build_search_query(int chain_count, const std::string& symmetry, const Endpoints& endpoints = {});

/// Request body for one page of results.
std::string paged_document(const SearchQuery& query, std::size_t start, std::size_t rows);

/// All polymer entity ids matching the query, walking every page.
/// Ids keep first-seen order with duplicates removed.
std::vector<std::string> fetch_entry_ids(const SearchQuery& query, Transport& transport,
                                         const Endpoints& endpoints = {});

struct FetchedEntry {
  std::string id;
  std::string sequence;
  std::chrono::system_clock::time_point retrieved_at;
};

/// Header lines stripped, body joined, whitespace dropped, upper-cased and
/// validated. Throws BadFasta or BadSymbol.
std::string parse_fasta_sequence(const std::string& payload);

FetchedEntry fetch_sequence(const std::string& id, Transport& transport, const Endpoints& endpoints = {});

/// Fetches several ids with at most `in_flight` concurrent requests; the
/// result is sorted by id.
std::vector<FetchedEntry> fetch_sequences(const std::vector<std::string>& ids, Transport& transport,
                                          unsigned in_flight = 4, const Endpoints& endpoints = {});

/// Drops exact-duplicate sequences (first by id order wins; sequences seen
/// in both classes are dropped from both), caps each class, and returns a
/// balanced dataset. Throws InsufficientUnique.
StoichiometryDataset assemble_corpus(std::vector<FetchedEntry> entries_60, std::vector<FetchedEntry> entries_180,
                                     std::size_t per_class_cap);

}  // namespace stoic::pdb
