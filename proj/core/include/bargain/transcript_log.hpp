#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/session.hpp"

namespace bargain {

inline constexpr int kLogSchemaVersion = 1;

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Chained per-utterance digests; entry i covers utterances 0..i.
std::vector<std::string> transcript_digests(std::span<const Utterance> transcript);

/// One `round` line of the log.
struct LoggedRound {
  std::string session_id;
  std::size_t run_index = 0;
  GameConfig game;
  RoundRecord record;
  /// As stored; compare with transcript_digests() to detect edits.
  std::vector<std::string> digests;
};

/// One `run_aborted` line.
struct LoggedAbort {
  std::string session_id;
  std::size_t run_index = 0;
  std::string reason;
};

struct TranscriptLog {
  std::vector<LoggedRound> rounds;
  std::vector<LoggedAbort> aborts;

  /// Rounds sorted by (run, round), then grouped per run for aggregate().
  std::vector<RunResult> runs() const;
  const LoggedRound* find(std::size_t run_index, int round_index) const;
};

std::string serialize_round(std::string_view session_id, std::size_t run_index,
                            const GameConfig& game, const RoundRecord& record);
std::string serialize_abort(std::string_view session_id, std::size_t run_index,
                            std::string_view reason);

/// Parses one line; throws ParseError on bad JSON, unknown kind or a
/// schema_version other than kLogSchemaVersion.
void parse_log_line(std::string_view line, TranscriptLog& into);
TranscriptLog parse_log(std::istream& in);
TranscriptLog load_log(const std::string& path);

/// Writes finished runs as log lines. Wrap in OrderedSink (run_session does)
/// to get run-ordered output.
class TranscriptWriter : public RecordSink {
 public:
  TranscriptWriter(std::ostream& out, std::string session_id, GameConfig game);
  void on_run(const RunResult& run) override;

  std::size_t records_written() const { return records_; }

 private:
  std::ostream& out_;
  std::string session_id_;
  GameConfig game_;
  std::mutex mu_;
  std::size_t records_ = 0;
};

}  // namespace bargain
