#pragma once

#include <string>
#include <string_view>

#include "courtside/error.hpp"

namespace courtside::detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

inline SplitUrl split_url(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos || scheme == 0) {
    throw Error(ErrorCode::config, "endpoint must be an absolute http(s) URL: " + std::string(url));
  }
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

}  // namespace courtside::detail
