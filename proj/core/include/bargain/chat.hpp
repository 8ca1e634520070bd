#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/game.hpp"

namespace bargain {

enum class EngineFamily { Gpt, Claude, Cohere, J2, Scripted, Replay };

std::string_view to_string(EngineFamily family);

struct EngineId {
  EngineFamily family = EngineFamily::Scripted;
  std::string model_name = "scripted";

  /// "gpt-4", "claude-v1.3", "cohere-command", "j2-jumbo-instruct",
  /// "scripted", "scripted:stub", "replay". Throws ConfigError otherwise.
  static EngineId parse(std::string_view text);

  bool is_remote() const {
    return family != EngineFamily::Scripted && family != EngineFamily::Replay;
  }
  const std::string& to_string() const { return model_name; }

  bool operator==(const EngineId&) const = default;
};

/// Sampling temperature each provider family was run with.
double default_temperature(EngineFamily family);

struct AgentSpec {
  Role role = Role::Seller;
  EngineId engine;
  std::string persona_prompt;
  double temperature = 1.0;

  /// Fills `temperature` from the engine family.
  static AgentSpec with_defaults(Role role, EngineId engine, std::string persona_prompt);
  void validate() const;
};

enum class ChatTag { User, Assistant };

struct ChatMessage {
  ChatTag tag = ChatTag::User;
  std::string text;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
  std::string text;
  /// Characters, the same unit as the response-length metric.
  std::size_t char_count = 0;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// A completed game as the improved player remembers it.
struct PriorRound {
  int round_index = 1;
  std::vector<Utterance> transcript;
  GameState outcome;
  std::vector<std::string> feedback;

  bool operator==(const PriorRound&) const = default;
};

/// Everything a player carries into a game besides the live transcript.
/// The rival's context never has blocks.
struct PlayerContext {
  std::string persona_prompt;
  std::vector<PriorRound> blocks;
};

inline constexpr std::string_view kPriorRoundMarker = "=== Previous round ";
inline constexpr std::string_view kFeedbackMarker = "Feedback received after round ";

std::string render_dialog_line(const Utterance& u);
std::string render_prior_block(const PriorRound& block);

/// Persona, then one block per prior round, then the live transcript as
/// messages tagged from `role`'s point of view.
ChatRequest render_player_request(Role role, const PlayerContext& context,
                                  std::span<const Utterance> history, double temperature);

/// A player backed by any chat backend (remote model or test double).
class ChatAgent : public Agent {
 public:
  ChatAgent(Role role, ChatBackend& backend, PlayerContext context, double temperature);
  std::string respond(std::span<const Utterance> history) override;

 private:
  Role role_;
  ChatBackend& backend_;
  PlayerContext context_;
  double temperature_;
};

}  // namespace bargain
