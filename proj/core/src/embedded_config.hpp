#pragma once

#include <string_view>

namespace songcraft::embedded {

std::string_view RegistryDocument();
std::string_view PromptLibraryDocument();
std::string_view MoodTableDocument();

}  // namespace songcraft::embedded
