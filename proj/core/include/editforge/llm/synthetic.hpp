#pragma once

#include <string>
#include <string_view>

#include "editforge/llm/chat.hpp"

namespace editforge::llm {

/// Offline stand-in for a chat model, used as the mock backend's fallback.
///
/// Recognises the shipped prompt templates and answers in the expected
/// grammar with varied, plausible content: numbered instruction lists,
/// scenario lists, input/output Python pairs whose edit follows the
/// instruction, Yes/No verdicts, rewritten commit messages and intent
/// labels. The answer is a pure function of the prompt text, and a small
/// fraction of answers are deliberately malformed so retry and discard
/// paths run in end-to-end tests.
std::string synthetic_response(std::string_view prompt);

MockChatClient::Responder synthetic_responder();

}  // namespace editforge::llm
