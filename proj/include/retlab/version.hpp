#ifndef RETLAB_VERSION_HPP
#define RETLAB_VERSION_HPP

namespace retlab {

inline constexpr const char* version_string = "0.1.0";

} // namespace retlab

#endif
