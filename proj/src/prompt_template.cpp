#include "twinsynth/prompt_template.hpp"

#include <algorithm>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {
namespace {

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

// Calls on_text for literal runs and on_slot for each well-formed `{{name}}`.
template <typename OnText, typename OnSlot>
void scan(std::string_view body, OnText&& on_text, OnSlot&& on_slot) {
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto open = body.find("{{", pos);
    if (open == std::string_view::npos) {
      on_text(body.substr(pos));
      return;
    }
    auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) {
      on_text(body.substr(pos));
      return;
    }
    const auto name = text::trim(body.substr(open + 2, close - open - 2));
    const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), is_slot_char);
    if (!ok) {
      on_text(body.substr(pos, open + 2 - pos));
      pos = open + 2;
      continue;
    }
    on_text(body.substr(pos, open - pos));
    on_slot(name);
    pos = close + 2;
  }
}

}  // namespace

PromptTemplate::PromptTemplate(std::string id, std::string version, std::string body)
    : id_(std::move(id)), version_(std::move(version)), body_(std::move(body)) {
  const auto names = slots_in(body_);
  required_.insert(names.begin(), names.end());
}

PromptTemplate::PromptTemplate(std::string id, std::string version, std::string body, std::set<std::string> required)
    : id_(std::move(id)), version_(std::move(version)), body_(std::move(body)), required_(std::move(required)) {
  const auto names = slots_in(body_);
  for (const auto& r : required_) {
    if (std::find(names.begin(), names.end(), r) == names.end()) {
      throw InvariantError("required slot '" + r + "' does not occur in template body", id_);
    }
  }
}

std::vector<std::string> PromptTemplate::slots_in(std::string_view body) {
  std::vector<std::string> names;
  scan(body, [](std::string_view) {},
       [&](const std::string& name) {
         if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
       });
  return names;
}

RenderResult render_template_checked(const PromptTemplate& t, const SlotMap& slots, RenderOptions opts) {
  for (const auto& name : t.required_slots()) {
    auto it = slots.find(name);
    if (it == slots.end() || (opts.reject_empty && text::trim(it->second).empty())) throw MissingSlotError(name);
  }
  RenderResult r;
  const auto used = PromptTemplate::slots_in(t.body());
  for (const auto& [name, _] : slots) {
    if (std::find(used.begin(), used.end(), name) == used.end()) r.warnings.push_back(name);
  }
  scan(t.body(), [&](std::string_view lit) { r.text.append(lit); },
       [&](const std::string& name) {
         auto it = slots.find(name);
         // Optional slots absent from the map render as empty.
         if (it != slots.end()) r.text += it->second;
       });
  return r;
}

std::string render_template(const PromptTemplate& t, const SlotMap& slots, RenderOptions opts) {
  return render_template_checked(t, slots, opts).text;
}

TemplateStore::TemplateStore(std::filesystem::path root) : root_(std::move(root)) {}

bool TemplateStore::has(const std::string& stage) const {
  std::error_code ec;
  return std::filesystem::is_directory(root_ / stage, ec);
}

PromptTemplate TemplateStore::get(const std::string& stage, const std::string& version) const {
  const auto dir = root_ / stage;
  std::string chosen = version;
  if (chosen.empty()) {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.path().extension() == ".txt") chosen = std::max(chosen, entry.path().stem().string());
    }
    if (ec || chosen.empty()) throw ConfigError("no template for stage '" + stage + "' under " + root_.string());
  }
  const auto path = dir / (chosen + ".txt");
  if (!std::filesystem::exists(path)) throw ConfigError("template file not found: " + path.string());
  return PromptTemplate(stage, chosen, read_text_file(path.string()));
}

}  // namespace twinsynth
