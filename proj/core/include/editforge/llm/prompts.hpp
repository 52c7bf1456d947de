#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace editforge::llm {

enum class PromptKind {
    instruction_gen,
    scenario_gen,
    instance_gen,
    judge,
    message_rewrite,
    intent_classify,
};

inline constexpr std::array kAllPromptKinds{
    PromptKind::instruction_gen, PromptKind::scenario_gen,    PromptKind::instance_gen,
    PromptKind::judge,           PromptKind::message_rewrite, PromptKind::intent_classify,
};

std::string_view to_string(PromptKind kind) noexcept;
std::optional<PromptKind> parse_prompt_kind(std::string_view name) noexcept;

/// The fixed task sentence(s) for each stage. The four generation/judging
/// stages use fixed published wording; message_rewrite and intent_classify
/// were written for this project.
std::string_view task_statement(PromptKind kind) noexcept;

/// Template text with `{slot}` placeholders. Only known slot names are
/// substituted, so literal braces in code survive rendering.
struct PromptTemplate {
    PromptKind kind;
    std::string body;
};

PromptTemplate default_template(PromptKind kind);

/// Single-pass substitution: values are inserted verbatim and never
/// re-scanned for placeholders.
std::string render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& slots);

class PromptLibrary {
public:
    /// Shipped defaults for every stage.
    PromptLibrary();

    /// Defaults overridden by `<dir>/<kind>.txt` where such files exist.
    static PromptLibrary from_directory(const std::filesystem::path& dir);

    /// Writes every template to `<dir>/<kind>.txt`.
    void write_directory(const std::filesystem::path& dir) const;

    const PromptTemplate& get(PromptKind kind) const;
    void set(PromptTemplate tmpl);

private:
    std::map<PromptKind, PromptTemplate> templates_;
};

}  // namespace editforge::llm
