#include "stoic/pdb_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stoic/parallel.hpp"

namespace stoic::pdb {

namespace {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string request_key(const HttpRequest& request) {
  std::string url = request.url;
  if (const auto scheme = url.find("://"); scheme != std::string::npos) url = url.substr(scheme + 3);
  std::string key = request.method + "_";
  for (char c : url) key += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  while (!key.empty() && key.back() == '_') key.pop_back();
  if (!request.body.empty()) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(request.body)));
    key += "_";
    key += hex;
  }
  return key;
}

std::string format_recording(const HttpResponse& response) {
  return "HTTP " + std::to_string(response.status) + "\n" + response.body;
}

HttpResponse parse_recording(const std::string& text) {
  const auto nl = text.find('\n');
  const std::string status_line = text.substr(0, nl);
  HttpResponse r;
  if (status_line.rfind("HTTP ", 0) != 0) throw Error(ErrorCode::MalformedResponse, "recording lacks 'HTTP <code>' line");
  try {
    r.status = std::stoi(status_line.substr(5));
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedResponse, "bad status line '" + status_line + "'");
  }
  r.body = nl == std::string::npos ? std::string() : text.substr(nl + 1);
  return r;
}

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_))
    throw Error(ErrorCode::Io, "fixtures directory '" + dir_.string() + "' does not exist");
}

HttpResponse FixtureTransport::send(const HttpRequest& request) {
  const auto path = dir_ / (request_key(request) + ".resp");
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::Network, "no recorded response for " + request.method + " " + request.url + " (" +
                                        path.filename().string() + ")");
  return parse_recording(read_file(path));
}

CachingTransport::CachingTransport(std::unique_ptr<Transport> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

HttpResponse CachingTransport::send(const HttpRequest& request) {
  const auto path = dir_ / (request_key(request) + ".resp");
  if (std::filesystem::exists(path)) return parse_recording(read_file(path));
  HttpResponse r = inner_->send(request);
  if (r.status >= 200 && r.status < 300) write_file_atomic(path, format_recording(r));
  return r;
}

SearchQuery build_search_query(int chain_count, const std::string& symmetry, const Endpoints& endpoints) {
  if (chain_count <= 0) throw Error(ErrorCode::BadChainCount, std::to_string(chain_count));
  if (chain_count != 60 && chain_count != 180)
    std::clog << "stoic: warning: chain count " << chain_count << " is outside the 60/180 corpus\n";
  nlohmann::json count_clause = {
      {"type", "terminal"},
      {"service", "text"},
      {"parameters", {{"attribute", endpoints.chain_count_attribute}, {"operator", "equals"}, {"value", chain_count}}}};
  nlohmann::json symmetry_clause = {
      {"type", "terminal"},
      {"service", "text"},
      {"parameters", {{"attribute", endpoints.symmetry_attribute}, {"operator", "exact_match"}, {"value", symmetry}}}};
  nlohmann::json doc = {
      {"query", {{"type", "group"}, {"logical_operator", "and"}, {"nodes", {count_clause, symmetry_clause}}}},
      {"return_type", "polymer_entity"}};
  return SearchQuery{chain_count, symmetry, doc.dump()};
}

std::string paged_document(const SearchQuery& query, std::size_t start, std::size_t rows) {
  auto doc = nlohmann::json::parse(query.document);
  doc["request_options"] = {{"paginate", {{"start", start}, {"rows", rows}}}};
  return doc.dump();
}

std::vector<std::string> fetch_entry_ids(const SearchQuery& query, Transport& transport, const Endpoints& endpoints) {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  std::size_t start = 0;
  for (;;) {
    const HttpRequest req{"POST", endpoints.search_url, paged_document(query, start, endpoints.page_rows)};
    const HttpResponse resp = transport.send(req);
    if (resp.status == 204) break;  // no hits
    if (resp.status < 200 || resp.status >= 300) throw HttpStatusError(resp.status, req.url);
    std::size_t total = 0;
    std::size_t page_size = 0;
    try {
      const auto j = nlohmann::json::parse(resp.body);
      total = j.at("total_count").get<std::size_t>();
      for (const auto& hit : j.at("result_set")) {
        ++page_size;
        auto id = hit.at("identifier").get<std::string>();
        if (seen.insert(id).second) ids.push_back(std::move(id));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("search response: ") + e.what());
    }
    start += page_size;
    if (page_size == 0 || start >= total) break;
  }
  return ids;
}

std::string parse_fasta_sequence(const std::string& payload) {
  std::istringstream in(payload);
  std::string line;
  std::string sequence;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '>') {
      // Multi-entity payloads: keep only the first record.
      if (header_seen && !sequence.empty()) break;
      header_seen = true;
      continue;
    }
    if (!header_seen) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      throw Error(ErrorCode::BadFasta, "sequence data before any '>' header");
    }
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (!is_residue_symbol(up)) throw Error(ErrorCode::BadSymbol, "FASTA symbol '" + std::string(1, c) + "'");
      sequence += up;
    }
  }
  if (!header_seen) throw Error(ErrorCode::BadFasta, "payload has no '>' header");
  if (sequence.empty()) throw Error(ErrorCode::BadFasta, "empty sequence");
  return sequence;
}

FetchedEntry fetch_sequence(const std::string& id, Transport& transport, const Endpoints& endpoints) {
  if (id.empty()) throw Error(ErrorCode::BadConfig, "empty entry id");
  const HttpRequest req{"GET", endpoints.fasta_url + id, ""};
  const HttpResponse resp = transport.send(req);
  if (resp.status < 200 || resp.status >= 300) throw HttpStatusError(resp.status, req.url);
  return FetchedEntry{id, parse_fasta_sequence(resp.body), std::chrono::system_clock::now()};
}

std::vector<FetchedEntry> fetch_sequences(const std::vector<std::string>& ids, Transport& transport,
                                          unsigned in_flight, const Endpoints& endpoints) {
  std::vector<FetchedEntry> out(ids.size());
  parallel_for(ids.size(), in_flight, [&](std::size_t i) { out[i] = fetch_sequence(ids[i], transport, endpoints); });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

StoichiometryDataset assemble_corpus(std::vector<FetchedEntry> entries_60, std::vector<FetchedEntry> entries_180,
                                     std::size_t per_class_cap) {
  if (entries_60.empty() || entries_180.empty()) throw Error(ErrorCode::Empty, "both classes need fetched entries");
  if (per_class_cap == 0) throw Error(ErrorCode::BadConfig, "per-class cap must be positive");
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(entries_60.begin(), entries_60.end(), by_id);
  std::sort(entries_180.begin(), entries_180.end(), by_id);

  auto unique_sequences = [](const std::vector<FetchedEntry>& entries) {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.sequence);
    return s;
  };
  const auto seq_60 = unique_sequences(entries_60);
  const auto seq_180 = unique_sequences(entries_180);

  std::vector<ProteinRecord> records;
  auto take = [&](const std::vector<FetchedEntry>& entries, const std::set<std::string>& other,
                  StoichiometryClass label) {
    std::unordered_set<std::string> kept;
    std::size_t count = 0;
    for (const auto& e : entries) {
      if (count == per_class_cap) break;
      if (other.count(e.sequence)) continue;  // ambiguous stoichiometry
      if (!kept.insert(e.sequence).second) continue;
      records.push_back(ProteinRecord{e.id, e.sequence, label});
      ++count;
    }
    if (count < per_class_cap)
      throw Error(ErrorCode::InsufficientUnique, std::to_string(chain_count_of(label)) + "-mer class has " +
                                                     std::to_string(count) + " unique sequences, cap is " +
                                                     std::to_string(per_class_cap));
  };
  take(entries_60, seq_180, StoichiometryClass::Sixty);
  take(entries_180, seq_60, StoichiometryClass::OneEighty);

  std::size_t longest = 0;
  for (const auto& r : records) longest = std::max(longest, r.sequence.size());
  return StoichiometryDataset(std::move(records), longest);
}

}  // namespace stoic::pdb
