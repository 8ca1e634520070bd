#include "bargain/transcript_log.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

namespace bargain {

using nlohmann::ordered_json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Money money_at(const ordered_json& j, const char* key) {
  auto text = j.at(key).get<std::string>();
  auto m = Money::parse(text);
  if (!m) throw ParseError(std::string("bad amount for '") + key + "': " + text);
  return *m;
}

Role role_at(const ordered_json& j, const char* key) {
  auto text = j.at(key).get<std::string>();
  auto r = parse_role(text);
  if (!r) throw ParseError("unknown role '" + text + "'");
  return *r;
}

ordered_json state_json(const GameState& state) {
  if (std::holds_alternative<OnGoing>(state)) return {{"kind", "ongoing"}};
  if (auto* d = std::get_if<Deal>(&state)) {
    ordered_json j = {{"kind", "deal"}};
    j["price"] = d->price ? ordered_json(d->price->to_string()) : ordered_json(nullptr);
    return j;
  }
  auto reason = std::get<NoDeal>(state).reason;
  return {{"kind", "no_deal"},
          {"reason", reason == NoDealReason::TurnCapReached ? "turn_cap" : "moderator"}};
}

GameState parse_state(const ordered_json& j) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "ongoing") return OnGoing{};
  if (kind == "deal") {
    Deal d;
    if (!j.at("price").is_null()) d.price = money_at(j, "price");
    return d;
  }
  if (kind == "no_deal") {
    auto reason = j.at("reason").get<std::string>();
    if (reason == "turn_cap") return NoDeal{NoDealReason::TurnCapReached};
    if (reason == "moderator") return NoDeal{NoDealReason::ModeratorClassified};
    throw ParseError("unknown no-deal reason '" + reason + "'");
  }
  throw ParseError("unknown state kind '" + kind + "'");
}

ordered_json game_json(const GameConfig& g) {
  return {{"product", g.product_name},
          {"floor", g.corridor.floor.to_string()},
          {"ceiling", g.corridor.ceiling.to_string()},
          {"currency", g.corridor.currency_symbol},
          {"seller_opening", g.seller_opening},
          {"buyer_opening", g.buyer_opening},
          {"max_exchanges", g.max_exchanges},
          {"moderator_window", g.moderator_window}};
}

GameConfig parse_game(const ordered_json& j) {
  GameConfig g;
  g.product_name = j.at("product").get<std::string>();
  g.corridor.floor = money_at(j, "floor");
  g.corridor.ceiling = money_at(j, "ceiling");
  g.corridor.currency_symbol = j.at("currency").get<std::string>();
  g.seller_opening = j.at("seller_opening").get<std::string>();
  g.buyer_opening = j.at("buyer_opening").get<std::string>();
  g.max_exchanges = j.at("max_exchanges").get<int>();
  g.moderator_window = j.at("moderator_window").get<std::size_t>();
  return g;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> transcript_digests(std::span<const Utterance> transcript) {
  std::vector<std::string> out;
  std::string prev;
  for (const auto& u : transcript) {
    auto material = prev + "|" + std::string(to_string(u.speaker)) + "|" +
                    std::to_string(u.turn_index) + "|" + u.text;
    prev = hex64(fnv1a64(material));
    out.push_back(prev);
  }
  return out;
}

std::vector<RunResult> TranscriptLog::runs() const {
  std::map<std::size_t, RunResult> by_run;
  for (const auto& r : rounds) {
    auto& run = by_run[r.run_index];
    run.run_index = r.run_index;
    run.records.push_back(r.record);
  }
  for (const auto& a : aborts) {
    auto& run = by_run[a.run_index];
    run.run_index = a.run_index;
    run.abort_reason = a.reason;
  }
  std::vector<RunResult> out;
  for (auto& [_, run] : by_run) {
    std::sort(run.records.begin(), run.records.end(),
              [](const RoundRecord& a, const RoundRecord& b) { return a.round_index < b.round_index; });
    out.push_back(std::move(run));
  }
  return out;
}

const LoggedRound* TranscriptLog::find(std::size_t run_index, int round_index) const {
  for (const auto& r : rounds) {
    if (r.run_index == run_index && r.record.round_index == round_index) return &r;
  }
  return nullptr;
}

std::string serialize_round(std::string_view session_id, std::size_t run_index,
                            const GameConfig& game, const RoundRecord& record) {
  ordered_json j;
  j["schema_version"] = kLogSchemaVersion;
  j["kind"] = "round";
  j["session_id"] = session_id;
  j["run_index"] = run_index;
  j["round_index"] = record.round_index;
  j["improved_role"] = to_string(record.improved_role);
  j["game"] = game_json(game);
  auto digests = transcript_digests(record.transcript);
  auto transcript = ordered_json::array();
  for (std::size_t i = 0; i < record.transcript.size(); ++i) {
    const auto& u = record.transcript[i];
    transcript.push_back({{"speaker", to_string(u.speaker)},
                          {"turn", u.turn_index},
                          {"text", u.text},
                          {"chars", u.char_length},
                          {"digest", digests[i]}});
  }
  j["transcript"] = std::move(transcript);
  j["state"] = state_json(record.terminal_state);
  j["feedback"] = record.feedback ? ordered_json(*record.feedback) : ordered_json(nullptr);
  j["flags"] = {{"out_of_corridor", record.flags.out_of_corridor},
                {"price_missing", record.flags.price_missing}};
  return j.dump();
}

std::string serialize_abort(std::string_view session_id, std::size_t run_index,
                            std::string_view reason) {
  ordered_json j;
  j["schema_version"] = kLogSchemaVersion;
  j["kind"] = "run_aborted";
  j["session_id"] = session_id;
  j["run_index"] = run_index;
  j["reason"] = reason;
  return j.dump();
}

void parse_log_line(std::string_view line, TranscriptLog& into) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("malformed log line: ") + e.what());
  }
  try {
    auto version = j.at("schema_version").get<int>();
    if (version != kLogSchemaVersion) {
      throw ParseError("log schema_version " + std::to_string(version) + " is not supported (want " +
                       std::to_string(kLogSchemaVersion) + ")");
    }
    auto kind = j.at("kind").get<std::string>();
    if (kind == "run_aborted") {
      into.aborts.push_back({j.at("session_id").get<std::string>(),
                             j.at("run_index").get<std::size_t>(),
                             j.at("reason").get<std::string>()});
      return;
    }
    if (kind != "round") throw ParseError("unknown log line kind '" + kind + "'");

    LoggedRound r;
    r.session_id = j.at("session_id").get<std::string>();
    r.run_index = j.at("run_index").get<std::size_t>();
    r.game = parse_game(j.at("game"));
    auto& rec = r.record;
    rec.round_index = j.at("round_index").get<int>();
    rec.improved_role = role_at(j, "improved_role");
    for (const auto& u : j.at("transcript")) {
      Utterance utt;
      utt.speaker = role_at(u, "speaker");
      utt.turn_index = u.at("turn").get<int>();
      utt.text = u.at("text").get<std::string>();
      utt.char_length = u.at("chars").get<std::size_t>();
      utt.round_index = rec.round_index;
      rec.transcript.push_back(std::move(utt));
      r.digests.push_back(u.at("digest").get<std::string>());
    }
    rec.terminal_state = parse_state(j.at("state"));
    if (!j.at("feedback").is_null()) {
      rec.feedback = j.at("feedback").get<std::vector<std::string>>();
      if (rec.feedback->size() != 3) throw ParseError("feedback must have exactly 3 entries");
    }
    const auto& flags = j.at("flags");
    rec.flags.out_of_corridor = flags.at("out_of_corridor").get<bool>();
    rec.flags.price_missing = flags.at("price_missing").get<bool>();
    into.rounds.push_back(std::move(r));
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("log line does not match schema: ") + e.what());
  }
}

TranscriptLog parse_log(std::istream& in) {
  TranscriptLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      parse_log_line(line, log);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

TranscriptLog load_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_log(in);
}

TranscriptWriter::TranscriptWriter(std::ostream& out, std::string session_id, GameConfig game)
    : out_(out), session_id_(std::move(session_id)), game_(std::move(game)) {}

void TranscriptWriter::on_run(const RunResult& run) {
  std::lock_guard lock(mu_);
  for (const auto& rec : run.records) {
    out_ << serialize_round(session_id_, run.run_index, game_, rec) << '\n';
    ++records_;
  }
  if (run.abort_reason) out_ << serialize_abort(session_id_, run.run_index, *run.abort_reason) << '\n';
  out_.flush();
}

}  // namespace bargain
