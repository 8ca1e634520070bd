#include "bargain/chat.hpp"

#include <cctype>

namespace bargain {

std::string_view to_string(EngineFamily family) {
  switch (family) {
    case EngineFamily::Gpt: return "gpt";
    case EngineFamily::Claude: return "claude";
    case EngineFamily::Cohere: return "cohere";
    case EngineFamily::J2: return "j2";
    case EngineFamily::Scripted: return "scripted";
    case EngineFamily::Replay: return "replay";
  }
  return "unknown";
}

EngineId EngineId::parse(std::string_view text) {
  auto starts = [&](std::string_view p) { return text.substr(0, p.size()) == p; };
  EngineId id;
  id.model_name = std::string(text);
  if (starts("gpt-")) {
    id.family = EngineFamily::Gpt;
  } else if (starts("claude-")) {
    id.family = EngineFamily::Claude;
  } else if (starts("cohere-") || starts("command")) {
    id.family = EngineFamily::Cohere;
  } else if (starts("j2-")) {
    id.family = EngineFamily::J2;
  } else if (text == "scripted" || starts("scripted:")) {
    id.family = EngineFamily::Scripted;
  } else if (text == "replay") {
    id.family = EngineFamily::Replay;
  } else {
    throw ConfigError("unknown engine '" + std::string(text) + "'");
  }
  return id;
}

double default_temperature(EngineFamily family) {
  switch (family) {
    case EngineFamily::Gpt:
    case EngineFamily::Claude: return 1.0;
    case EngineFamily::Cohere: return 0.75;
    case EngineFamily::J2: return 0.7;
    case EngineFamily::Scripted:
    case EngineFamily::Replay: return 0.0;
  }
  return 1.0;
}

AgentSpec AgentSpec::with_defaults(Role role, EngineId engine, std::string persona_prompt) {
  AgentSpec spec;
  spec.role = role;
  spec.temperature = default_temperature(engine.family);
  spec.engine = std::move(engine);
  spec.persona_prompt = std::move(persona_prompt);
  return spec;
}

void AgentSpec::validate() const {
  if (temperature < 0.0 || temperature > 2.0) {
    throw ConfigError("temperature must lie in [0, 2]");
  }
}

std::string render_dialog_line(const Utterance& u) {
  auto name = std::string(to_string(u.speaker));
  name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  return name + ": " + u.text;
}

std::string render_prior_block(const PriorRound& block) {
  auto k = std::to_string(block.round_index);
  std::string out;
  out += kPriorRoundMarker;
  out += k + " ===\n";
  for (const auto& u : block.transcript) out += render_dialog_line(u) + "\n";
  out += "Outcome: " + describe(block.outcome) + "\n";
  if (!block.feedback.empty()) {
    out += kFeedbackMarker;
    out += k + ":\n";
    for (std::size_t i = 0; i < block.feedback.size(); ++i) {
      out += std::to_string(i + 1) + ". " + block.feedback[i] + "\n";
    }
  }
  return out;
}

ChatRequest render_player_request(Role role, const PlayerContext& context,
                                  std::span<const Utterance> history, double temperature) {
  ChatRequest req;
  req.temperature = temperature;
  req.system_prompt = context.persona_prompt;
  if (!context.blocks.empty()) {
    req.system_prompt +=
        "\n\nHere are your previous games and the feedback you received. Use them to get a "
        "better price this time.\n";
    for (const auto& block : context.blocks) req.system_prompt += "\n" + render_prior_block(block);
  }
  for (const auto& u : history) {
    req.messages.push_back({u.speaker == role ? ChatTag::Assistant : ChatTag::User, u.text});
  }
  return req;
}

ChatAgent::ChatAgent(Role role, ChatBackend& backend, PlayerContext context, double temperature)
    : role_(role), backend_(backend), context_(std::move(context)), temperature_(temperature) {}

std::string ChatAgent::respond(std::span<const Utterance> history) {
  auto response = backend_.complete(render_player_request(role_, context_, history, temperature_));
  auto& text = response.text;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw BackendError("backend returned an empty reply");
  auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

}  // namespace bargain
