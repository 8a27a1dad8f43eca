#include "rotpose/rotation.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace rotpose {

void AngleSet::validate() const {
  if (!(step > 0.0)) {
    throw ValidationError("angle set: step must be positive, got " +
                          std::to_string(step));
  }
  if (!(stop > start)) {
    throw ValidationError("angle set: stop must exceed start");
  }
  if (start < 0.0 || stop > 360.0 + 1e-9) {
    throw ValidationError("angle set: range must lie within [0, 360]");
  }
}

std::vector<double> AngleSet::angles() const {
  validate();
  std::vector<double> out;
  // integer stepping avoids drift from repeated addition
  for (int i = 0;; ++i) {
    const double a = start + i * step;
    if (a >= stop - 1e-9) break;
    out.push_back(a);
  }
  return out;
}

AngleSet AngleSet::parse(std::string_view text) {
  std::array<double, 3> vals{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = text.find(':', pos);
    const std::string_view part = (i < 2)
        ? text.substr(pos, colon - pos)
        : text.substr(pos);
    if ((i < 2 && colon == std::string_view::npos) || part.empty()) {
      throw ValidationError("angle set: expected start:stop:step, got \"" +
                            std::string(text) + "\"");
    }
    try {
      std::size_t used = 0;
      vals[i] = std::stod(std::string(part), &used);
      if (used != part.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("angle set: malformed number \"" +
                            std::string(part) + "\" in \"" +
                            std::string(text) + "\"");
    }
    pos = colon + 1;
  }
  AngleSet set{vals[0], vals[1], vals[2]};
  set.validate();
  return set;
}

std::string AngleSet::to_text() const {
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  return fmt(start) + ":" + fmt(stop) + ":" + fmt(step);
}

}  // namespace rotpose
