#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace twinsynth {

using SlotMap = std::map<std::string, std::string>;

// Plain-text prompt with `{{slot}}` placeholders. Templates live on disk as
// templates/<stage>/<version>.txt; the version is recorded in the provenance
// of anything the template produced.
class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string version, std::string body);
  // Throws InvariantError when a required slot never occurs in the body.
  PromptTemplate(std::string id, std::string version, std::string body, std::set<std::string> required);

  const std::string& id() const { return id_; }
  const std::string& version() const { return version_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& required_slots() const { return required_; }

  // Slot names in order of first appearance.
  static std::vector<std::string> slots_in(std::string_view body);

 private:
  std::string id_;
  std::string version_;
  std::string body_;
  std::set<std::string> required_;
};

struct RenderOptions {
  // An empty value counts as missing.
  bool reject_empty = false;
};

struct RenderResult {
  std::string text;
  std::vector<std::string> warnings;  // unknown slots that were supplied and ignored
};

// Throws MissingSlotError naming the first missing required slot.
RenderResult render_template_checked(const PromptTemplate& t, const SlotMap& slots, RenderOptions opts = {});
std::string render_template(const PromptTemplate& t, const SlotMap& slots, RenderOptions opts = {});

// Loads templates/<stage>/<version>.txt. When `version` is empty the
// lexicographically greatest version file is used.
class TemplateStore {
 public:
  explicit TemplateStore(std::filesystem::path root);

  PromptTemplate get(const std::string& stage, const std::string& version = {}) const;
  bool has(const std::string& stage) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace twinsynth
