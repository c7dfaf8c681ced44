#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pathnav {

// Stage templates with {{placeholder}} substitution. Templates are config,
// not code: a pack directory holds one <stage>.txt per stage and overrides
// the builtin text.
class PromptPack {
 public:
  static PromptPack builtin();

  // Starts from the builtin pack, overrides with any <stage>.txt found.
  static PromptPack load_dir(const std::filesystem::path& dir);

  static const std::vector<std::string>& stages();

  const std::string& template_for(const std::string& stage) const;

  std::string render(const std::string& stage,
                     const std::vector<std::pair<std::string, std::string>>&
                         vars) const;

  void write_dir(const std::filesystem::path& dir) const;

 private:
  // Required placeholders must survive any override; checked on load.
  void validate() const;

  std::map<std::string, std::string> templates_;
};

}  // namespace pathnav
