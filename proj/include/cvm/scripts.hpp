#pragma once

#include <string_view>

// Reference scripts under scripts/, compiled in so tools work from any cwd.
namespace cvm::scripts {

std::string_view monitoring();
std::string_view monitoring_unfixed();
std::string_view interpose();
std::string_view adapt_cipher();
std::string_view bootstrap();

}  // namespace cvm::scripts
