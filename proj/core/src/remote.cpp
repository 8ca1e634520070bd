#include "bargain/remote.hpp"

#include <algorithm>
#include <thread>

#include <nlohmann/json.hpp>

namespace bargain {

using nlohmann::json;

namespace {

constexpr std::string_view kHumanTag = "\n\nHuman: ";
constexpr std::string_view kAssistantTag = "\n\nAssistant: ";
constexpr std::string_view kClaudeTail = "\n\nAssistant:";
constexpr std::string_view kJ2RoundEnd = "\n##\n##\n";
constexpr std::string_view kJ2Tail = "Assistant:";

bool is_retryable_status(int status) { return status == 429 || status >= 500; }

std::string tag_name(ChatTag tag) { return tag == ChatTag::User ? "user" : "assistant"; }

ChatTag parse_tag(const std::string& s) {
  if (s == "user" || s == "USER") return ChatTag::User;
  if (s == "assistant" || s == "CHATBOT") return ChatTag::Assistant;
  throw ParseError("unknown chat role '" + s + "'");
}

std::vector<ChatMessage> parse_claude_turns(std::string_view rest) {
  std::vector<ChatMessage> out;
  while (!rest.empty()) {
    ChatTag tag;
    if (rest.substr(0, kHumanTag.size()) == kHumanTag) {
      tag = ChatTag::User;
      rest.remove_prefix(kHumanTag.size());
    } else if (rest.substr(0, kAssistantTag.size()) == kAssistantTag) {
      tag = ChatTag::Assistant;
      rest.remove_prefix(kAssistantTag.size());
    } else {
      throw ParseError("malformed claude prompt");
    }
    auto next = std::min(rest.find(kHumanTag), rest.find(kAssistantTag));
    auto end = std::min(next, rest.size());
    out.push_back({tag, std::string(rest.substr(0, end))});
    rest.remove_prefix(end);
  }
  return out;
}

}  // namespace

HttpResponse OfflineTransport::post(const HttpRequest& request) {
  throw ConfigError("offline mode: refusing request to " + request.base_url + request.path);
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int failed_attempt,
                                        std::mt19937_64& rng) {
  auto cap = policy.base_delay.count() << std::clamp(failed_attempt - 1, 0, 30);
  std::uniform_int_distribution<std::int64_t> dist(0, cap);
  return std::chrono::milliseconds(dist(rng));
}

RateLimiter::RateLimiter(double requests_per_minute, Clock& clock)
    : capacity_(requests_per_minute),
      tokens_(requests_per_minute),
      per_ms_(requests_per_minute / 60000.0),
      clock_(clock),
      last_(clock.now()) {
  if (requests_per_minute <= 0) throw ConfigError("requests_per_minute must be positive");
}

void RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    auto now = clock_.now();
    auto elapsed = std::chrono::duration<double, std::milli>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * per_ms_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::milliseconds(static_cast<std::int64_t>((1.0 - tokens_) / per_ms_) + 1);
    lock.unlock();
    clock_.sleep_for(wait);
    lock.lock();
  }
}

std::string default_base_url(EngineFamily family) {
  switch (family) {
    case EngineFamily::Gpt: return "https://api.openai.com";
    case EngineFamily::Claude: return "https://api.anthropic.com";
    case EngineFamily::Cohere: return "https://api.cohere.ai";
    case EngineFamily::J2: return "https://api.ai21.com";
    default: return "";
  }
}

std::string api_key_env_var(EngineFamily family) {
  switch (family) {
    case EngineFamily::Gpt: return "OPENAI_API_KEY";
    case EngineFamily::Claude: return "ANTHROPIC_API_KEY";
    case EngineFamily::Cohere: return "COHERE_API_KEY";
    case EngineFamily::J2: return "AI21_API_KEY";
    default: return "";
  }
}

std::string render_prompt_text(EngineFamily family, const ChatRequest& request) {
  std::string out;
  if (family == EngineFamily::Claude) {
    out += kHumanTag;
    out += request.system_prompt;
    for (const auto& m : request.messages) {
      out += m.tag == ChatTag::User ? kHumanTag : kAssistantTag;
      out += m.text;
    }
    out += kClaudeTail;
    return out;
  }
  if (family == EngineFamily::J2) {
    out += request.system_prompt;
    out += kJ2RoundEnd;
    for (const auto& m : request.messages) {
      out += m.tag == ChatTag::User ? "User: " : "Assistant: ";
      out += m.text;
      out += kJ2RoundEnd;
    }
    out += kJ2Tail;
    return out;
  }
  throw ConfigError("engine family " + std::string(to_string(family)) + " has no text prompt form");
}

RenderedCall render_request(const EngineId& engine, const ChatRequest& request) {
  if (request.messages.empty()) {
    throw ProtocolError("chat request has no messages");
  }
  json body;
  RenderedCall call;
  switch (engine.family) {
    case EngineFamily::Gpt: {
      call.path = "/v1/chat/completions";
      json messages = json::array();
      messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
      for (const auto& m : request.messages) {
        messages.push_back({{"role", tag_name(m.tag)}, {"content", m.text}});
      }
      body = {{"model", engine.model_name},
              {"messages", std::move(messages)},
              {"temperature", request.temperature}};
      break;
    }
    case EngineFamily::Claude:
      call.path = "/v1/complete";
      body = {{"model", engine.model_name},
              {"prompt", render_prompt_text(engine.family, request)},
              {"max_tokens_to_sample", 400},
              {"temperature", request.temperature}};
      break;
    case EngineFamily::Cohere: {
      call.path = "/v1/chat";
      if (request.messages.back().tag != ChatTag::User) {
        throw ProtocolError("cohere requests must end with a user message");
      }
      json history = json::array();
      for (std::size_t i = 0; i + 1 < request.messages.size(); ++i) {
        const auto& m = request.messages[i];
        history.push_back(
            {{"role", m.tag == ChatTag::User ? "USER" : "CHATBOT"}, {"message", m.text}});
      }
      body = {{"model", engine.model_name},
              {"preamble", request.system_prompt},
              {"chat_history", std::move(history)},
              {"message", request.messages.back().text},
              {"temperature", request.temperature}};
      break;
    }
    case EngineFamily::J2:
      call.path = "/studio/v1/" + engine.model_name + "/complete";
      body = {{"prompt", render_prompt_text(engine.family, request)},
              {"maxTokens", 400},
              {"temperature", request.temperature},
              {"stopSequences", json::array({"##"})}};
      break;
    default:
      throw ConfigError("engine " + engine.model_name + " is not a remote engine");
  }
  call.body = body.dump();
  return call;
}

ChatRequest parse_rendered(const EngineId& engine, const std::string& body) {
  auto j = json::parse(body);
  ChatRequest req;
  req.temperature = j.at("temperature").get<double>();
  switch (engine.family) {
    case EngineFamily::Gpt: {
      const auto& msgs = j.at("messages");
      if (msgs.empty() || msgs[0].at("role") != "system") throw ParseError("missing system message");
      req.system_prompt = msgs[0].at("content").get<std::string>();
      for (std::size_t i = 1; i < msgs.size(); ++i) {
        req.messages.push_back(
            {parse_tag(msgs[i].at("role").get<std::string>()), msgs[i].at("content")});
      }
      break;
    }
    case EngineFamily::Claude: {
      std::string_view prompt = j.at("prompt").get_ref<const std::string&>();
      if (prompt.size() < kClaudeTail.size() ||
          prompt.substr(prompt.size() - kClaudeTail.size()) != kClaudeTail) {
        throw ParseError("claude prompt must end with the assistant tag");
      }
      prompt.remove_suffix(kClaudeTail.size());
      auto turns = parse_claude_turns(prompt);
      if (turns.empty() || turns[0].tag != ChatTag::User) throw ParseError("missing preamble turn");
      req.system_prompt = turns[0].text;
      req.messages.assign(turns.begin() + 1, turns.end());
      break;
    }
    case EngineFamily::Cohere: {
      req.system_prompt = j.at("preamble").get<std::string>();
      for (const auto& m : j.at("chat_history")) {
        req.messages.push_back({parse_tag(m.at("role").get<std::string>()), m.at("message")});
      }
      req.messages.push_back({ChatTag::User, j.at("message").get<std::string>()});
      break;
    }
    case EngineFamily::J2: {
      std::string_view prompt = j.at("prompt").get_ref<const std::string&>();
      std::vector<std::string_view> parts;
      for (auto pos = prompt.find(kJ2RoundEnd); pos != std::string_view::npos;
           pos = prompt.find(kJ2RoundEnd)) {
        parts.push_back(prompt.substr(0, pos));
        prompt.remove_prefix(pos + kJ2RoundEnd.size());
      }
      if (parts.empty() || prompt != kJ2Tail) throw ParseError("malformed j2 prompt");
      req.system_prompt = std::string(parts[0]);
      for (std::size_t i = 1; i < parts.size(); ++i) {
        auto p = parts[i];
        if (p.substr(0, 6) == "User: ") {
          req.messages.push_back({ChatTag::User, std::string(p.substr(6))});
        } else if (p.substr(0, 11) == "Assistant: ") {
          req.messages.push_back({ChatTag::Assistant, std::string(p.substr(11))});
        } else {
          throw ParseError("malformed j2 turn");
        }
      }
      break;
    }
    default:
      throw ConfigError("engine " + engine.model_name + " is not a remote engine");
  }
  return req;
}

std::string parse_response_text(EngineFamily family, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
    switch (family) {
      case EngineFamily::Gpt:
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      case EngineFamily::Claude: return j.at("completion").get<std::string>();
      case EngineFamily::Cohere: return j.at("text").get<std::string>();
      case EngineFamily::J2:
        return j.at("completions").at(0).at("data").at("text").get<std::string>();
      default: break;
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("unreadable provider response: ") + e.what());
  }
  throw ConfigError("not a remote engine family");
}

Headers auth_headers(EngineFamily family, const std::string& api_key) {
  if (family == EngineFamily::Claude) {
    return {{"x-api-key", api_key}, {"anthropic-version", "2023-06-01"}};
  }
  return {{"Authorization", "Bearer " + api_key}};
}

RemoteChatBackend::RemoteChatBackend(EngineId engine, ProviderSettings settings, RetryPolicy retry,
                                     Transport& transport, Clock& clock,
                                     std::shared_ptr<RateLimiter> limiter,
                                     std::uint64_t jitter_seed)
    : engine_(std::move(engine)),
      settings_(std::move(settings)),
      retry_(retry),
      transport_(transport),
      clock_(clock),
      limiter_(std::move(limiter)),
      jitter_(jitter_seed) {
  if (!engine_.is_remote()) throw ConfigError(engine_.model_name + " is not a remote engine");
  if (settings_.api_key.empty()) {
    throw ConfigError("missing API key for " + engine_.model_name + " (set " +
                      api_key_env_var(engine_.family) + ")");
  }
  if (settings_.base_url.empty()) settings_.base_url = default_base_url(engine_.family);
  if (retry_.max_attempts < 1) throw ConfigError("retry budget must be at least one attempt");
}

ChatResponse RemoteChatBackend::complete(const ChatRequest& request) {
  auto call = render_request(engine_, request);
  HttpRequest http{settings_.base_url, call.path, auth_headers(engine_.family, settings_.api_key),
                   call.body};
  http.headers.emplace_back("content-type", "application/json");

  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (limiter_) limiter_->acquire();
    ++attempts_;
    try {
      auto resp = transport_.post(http);
      if (resp.status >= 200 && resp.status < 300) {
        ChatResponse out;
        out.text = parse_response_text(engine_.family, resp.body);
        out.char_count = count_chars(out.text);
        return out;
      }
      last_error = "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200);
      if (!is_retryable_status(resp.status)) {
        throw BackendError(engine_.model_name + " request rejected, " + last_error);
      }
    } catch (const TransportError& e) {
      last_error = e.what();
    }
    if (attempt < retry_.max_attempts) clock_.sleep_for(backoff_delay(retry_, attempt, jitter_));
  }
  throw BackendError(engine_.model_name + " failed after " + std::to_string(retry_.max_attempts) +
                     " attempts, last error: " + last_error);
}

}  // namespace bargain
