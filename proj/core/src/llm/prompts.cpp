#include "editforge/llm/prompts.hpp"

#include <fstream>
#include <sstream>

#include "editforge/error.hpp"

namespace editforge::llm {
namespace {

constexpr std::string_view kInstructionGenTask =
    "Given the existing instructions, please generate a list of diverse python code editing "
    "instructions. The new instructions should address diverse editing tasks. Please ensure that "
    "the instructions are clear and diverse. Include any relevant variable names in the "
    "instruction.";

constexpr std::string_view kScenarioGenTask =
    "Given a python code editing task, please come up with 10 diverse scenarios concise "
    "description where this python code editing task could be performed or come from.";

constexpr std::string_view kInstanceGenTask =
    "Given python code editing task instructions and their scenarios where the task instruction "
    "could be used, you need to come up with examples for the following code editing tasks. You "
    "need to generate input and output code pair and make sure your variable names are suitable "
    "for the scenario. The input code is related to the task instruction, but must NOT meet the "
    "task requirements. The output code fulfills the task requirements based on input code.";

constexpr std::string_view kJudgeTask =
    "Given a code editing instruction, please determine if the output is an acceptable edited "
    "code response to the instruction and input? Give \"Yes\" or \"No\".";

constexpr std::string_view kRewriteTask =
    "The following commit changed the python file {file_path}. Rewrite the commit message as one "
    "precise, imperative code editing instruction that tells a developer exactly what to change "
    "in the code before the commit to obtain the code after the commit. Reply with the "
    "instruction only, as a single sentence.";

constexpr std::string_view kClassifyTask =
    "Classify the intent of the following python code editing instruction into exactly one of "
    "the categories listed below. Reply with the category name only.";

}  // namespace

std::string_view to_string(PromptKind kind) noexcept {
    switch (kind) {
        case PromptKind::instruction_gen: return "instruction_gen";
        case PromptKind::scenario_gen: return "scenario_gen";
        case PromptKind::instance_gen: return "instance_gen";
        case PromptKind::judge: return "judge";
        case PromptKind::message_rewrite: return "message_rewrite";
        case PromptKind::intent_classify: return "intent_classify";
    }
    return "instruction_gen";
}

std::optional<PromptKind> parse_prompt_kind(std::string_view name) noexcept {
    for (PromptKind k : kAllPromptKinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

std::string_view task_statement(PromptKind kind) noexcept {
    switch (kind) {
        case PromptKind::instruction_gen: return kInstructionGenTask;
        case PromptKind::scenario_gen: return kScenarioGenTask;
        case PromptKind::instance_gen: return kInstanceGenTask;
        case PromptKind::judge: return kJudgeTask;
        case PromptKind::message_rewrite: return kRewriteTask;
        case PromptKind::intent_classify: return kClassifyTask;
    }
    return {};
}

PromptTemplate default_template(PromptKind kind) {
    std::string body(task_statement(kind));
    switch (kind) {
        case PromptKind::instruction_gen:
            body +=
                "\n{intent_hint}\nExisting instructions:\n{exemplars}\n\n"
                "Write each new instruction on its own line, numbered 1., 2., 3., and so on.\n\n"
                "New instructions:\n";
            break;
        case PromptKind::scenario_gen:
            body += "\n\nTask: {instruction}\n\nScenarios:\n";
            break;
        case PromptKind::instance_gen:
            body +=
                "\n\nTask: {instruction}\nScenario: {scenario}\n\n"
                "Put the input code in the first ```python fenced block and the output code in "
                "the second.\n";
            break;
        case PromptKind::judge:
            body +=
                "\n\nInstruction: {instruction}\n\nInput:\n```python\n{input}\n```\n\n"
                "Output:\n```python\n{output}\n```\n";
            break;
        case PromptKind::message_rewrite:
            body +=
                "\n\nCommit message: {message}\n\nCode before:\n```python\n{before}\n```\n\n"
                "Code after:\n```python\n{after}\n```\n";
            break;
        case PromptKind::intent_classify:
            body += "\n\nCategories:\n{labels}\n\nInstruction: {instruction}\n\nCategory:";
            break;
    }
    return {kind, std::move(body)};
}

std::string render(const PromptTemplate& tmpl, const std::map<std::string, std::string>& slots) {
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size() + 256);
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            std::size_t close = body.find('}', i + 1);
            if (close != std::string::npos) {
                auto it = slots.find(body.substr(i + 1, close - i - 1));
                if (it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(body[i++]);
    }
    return out;
}

PromptLibrary::PromptLibrary() {
    for (PromptKind k : kAllPromptKinds) templates_.emplace(k, default_template(k));
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (PromptKind k : kAllPromptKinds) {
        const auto file = dir / (std::string(to_string(k)) + ".txt");
        if (!std::filesystem::exists(file)) continue;
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error(ErrorCategory::io, "cannot read prompt template " + file.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        lib.set({k, ss.str()});
    }
    return lib;
}

void PromptLibrary::write_directory(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [kind, tmpl] : templates_) {
        const auto file = dir / (std::string(to_string(kind)) + ".txt");
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCategory::io, "cannot write " + file.string());
        out << tmpl.body;
    }
}

const PromptTemplate& PromptLibrary::get(PromptKind kind) const { return templates_.at(kind); }

void PromptLibrary::set(PromptTemplate tmpl) { templates_[tmpl.kind] = std::move(tmpl); }

}  // namespace editforge::llm
