#include <gtest/gtest.h>

#include "bargain/chat.hpp"
#include "fakes.hpp"
#include "fixtures.hpp"

namespace bargain {
namespace {

using testing::usd;

TEST(EngineId, ParsesFamilies) {
  EXPECT_EQ(EngineId::parse("gpt-3.5-turbo").family, EngineFamily::Gpt);
  EXPECT_EQ(EngineId::parse("gpt-4").family, EngineFamily::Gpt);
  EXPECT_EQ(EngineId::parse("claude-instant-v1.0").family, EngineFamily::Claude);
  EXPECT_EQ(EngineId::parse("cohere-command").family, EngineFamily::Cohere);
  EXPECT_EQ(EngineId::parse("command-light").family, EngineFamily::Cohere);
  EXPECT_EQ(EngineId::parse("j2-jumbo-instruct").family, EngineFamily::J2);
  EXPECT_EQ(EngineId::parse("scripted").family, EngineFamily::Scripted);
  EXPECT_EQ(EngineId::parse("scripted:stub").family, EngineFamily::Scripted);
  EXPECT_EQ(EngineId::parse("replay").family, EngineFamily::Replay);
  EXPECT_THROW(EngineId::parse("llama-2"), ConfigError);
}

TEST(EngineId, OnlyProvidersNeedTheNetwork) {
  EXPECT_TRUE(EngineId::parse("gpt-4").is_remote());
  EXPECT_FALSE(EngineId::parse("scripted").is_remote());
  EXPECT_FALSE(EngineId::parse("replay").is_remote());
}

TEST(AgentSpec, TemperatureDefaultsByFamily) {
  auto t = [](const char* engine) {
    return AgentSpec::with_defaults(Role::Seller, EngineId::parse(engine), "p").temperature;
  };
  EXPECT_DOUBLE_EQ(t("gpt-4"), 1.0);
  EXPECT_DOUBLE_EQ(t("claude-v1.3"), 1.0);
  EXPECT_DOUBLE_EQ(t("cohere-command"), 0.75);
  EXPECT_DOUBLE_EQ(t("j2-jumbo-instruct"), 0.7);
}

TEST(AgentSpec, TemperatureRange) {
  auto spec = AgentSpec::with_defaults(Role::Buyer, EngineId::parse("gpt-4"), "p");
  spec.temperature = 2.5;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.temperature = 0.0;
  EXPECT_NO_THROW(spec.validate());
}

std::vector<Utterance> live_history() {
  return {Utterance::make(Role::Seller, "This is a good balloon and its price is $20.", 2, 0),
          Utterance::make(Role::Buyer, "Would you consider selling it for $10?", 2, 1),
          Utterance::make(Role::Seller, "How about $19.00?", 2, 2)};
}

TEST(PlayerRequest, TagsOwnTurnsAsAssistant) {
  PlayerContext ctx{"You sell.", {}};
  auto req = render_player_request(Role::Buyer, ctx, live_history(), 0.7);
  EXPECT_EQ(req.system_prompt, "You sell.");
  EXPECT_DOUBLE_EQ(req.temperature, 0.7);
  ASSERT_EQ(req.messages.size(), 3u);
  EXPECT_EQ(req.messages[0], (ChatMessage{ChatTag::User, "This is a good balloon and its price is $20."}));
  EXPECT_EQ(req.messages[1].tag, ChatTag::Assistant);
  EXPECT_EQ(req.messages[2].tag, ChatTag::User);
}

TEST(PlayerRequest, PriorBlocksAreVerbatimWithFeedback) {
  PriorRound block{1, live_history(), Deal{usd("16")}, {"a", "b", "c"}};
  auto text = render_prior_block(block);
  EXPECT_EQ(text,
            "=== Previous round 1 ===\n"
            "Seller: This is a good balloon and its price is $20.\n"
            "Buyer: Would you consider selling it for $10?\n"
            "Seller: How about $19.00?\n"
            "Outcome: DEAL $16.00\n"
            "Feedback received after round 1:\n"
            "1. a\n2. b\n3. c\n");

  PlayerContext ctx{"You sell.", {block, PriorRound{2, live_history(), NoDeal{}, {}}}};
  auto req = render_player_request(Role::Seller, ctx, live_history(), 1.0);
  EXPECT_EQ(req.system_prompt.find("You sell."), 0u);
  EXPECT_NE(req.system_prompt.find("=== Previous round 1 ==="), std::string::npos);
  EXPECT_NE(req.system_prompt.find("=== Previous round 2 ==="), std::string::npos);
  EXPECT_EQ(req.system_prompt.find("Feedback received after round 2"), std::string::npos);
}

TEST(ChatAgent, TrimsReplyAndRejectsEmpty) {
  testing::CapturingChatBackend padded([](const ChatRequest&) { return "  How about $18?\n"; });
  ChatAgent agent(Role::Seller, padded, {"persona", {}}, 1.0);
  EXPECT_EQ(agent.respond(live_history()), "How about $18?");
  ASSERT_EQ(padded.requests.size(), 1u);
  EXPECT_EQ(padded.requests[0].system_prompt, "persona");

  testing::CapturingChatBackend blank([](const ChatRequest&) { return " \n "; });
  ChatAgent silent(Role::Seller, blank, {"persona", {}}, 1.0);
  EXPECT_THROW(silent.respond(live_history()), BackendError);
}

}  // namespace
}  // namespace bargain
