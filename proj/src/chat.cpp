#include "courtside/chat.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "courtside/error.hpp"
#include "json.hpp"

namespace courtside {

std::string prompt_hash(std::string_view system, std::string_view user) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(system);
  feed("\x1f");
  feed(user);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScriptedClient::ScriptedClient(const std::vector<ScriptedEntry>& entries) {
  for (const auto& e : entries) table_[e.hash] = e;
}

ScriptedClient ScriptedClient::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open chat fixture " + path.string());
  std::vector<ScriptedEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      entries.push_back({j.at("hash").get<std::string>(), j.at("response").get<std::string>(), j.value("agent", "")});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ScriptedClient(entries);
}

void ScriptedClient::add(std::string_view system, std::string_view user, std::string response, std::string agent) {
  auto h = prompt_hash(system, user);
  table_[h] = ScriptedEntry{h, std::move(response), std::move(agent)};
}

std::string ScriptedClient::complete(const std::string& system, const std::string& user, const DecodeParams&) {
  auto it = table_.find(prompt_hash(system, user));
  if (it == table_.end()) throw Error(ErrorCode::chat, "no scripted response for request " + prompt_hash(system, user));
  return it->second.response;
}

RecordingClient::RecordingClient(ChatClient& inner, Labeler labeler) : inner_(inner), labeler_(std::move(labeler)) {}

std::string RecordingClient::complete(const std::string& system, const std::string& user, const DecodeParams& params) {
  std::string response = inner_.complete(system, user, params);
  ScriptedEntry entry{prompt_hash(system, user), response, labeler_ ? labeler_(system) : std::string()};
  std::lock_guard lock(mutex_);
  seen_[entry.hash] = std::move(entry);
  return response;
}

std::vector<ScriptedEntry> RecordingClient::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<ScriptedEntry> out;
  for (const auto& [_, e] : seen_) out.push_back(e);
  return out;
}

void RecordingClient::save(const std::filesystem::path& path) const { save_entries(entries(), path); }

void save_entries(const std::vector<ScriptedEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write chat fixture " + path.string());
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["hash"] = e.hash;
    if (!e.agent.empty()) j["agent"] = e.agent;
    j["response"] = e.response;
    out << j.dump() << '\n';
  }
}

}  // namespace courtside
