#include "obbkit/weapon_class.h"

#include "internal/text.h"

namespace obb {

std::string_view to_string(WeaponClass c) {
  switch (c) {
    case WeaponClass::kGun:
      return "Gun";
    case WeaponClass::kPistol:
      return "Pistol";
    case WeaponClass::kBackground:
      return "Background";
  }
  return "Background";
}

std::optional<WeaponClass> parse_object_class(std::string_view name) {
  const std::string_view n = internal::trim(name);
  if (internal::iequals(n, "gun")) return WeaponClass::kGun;
  if (internal::iequals(n, "pistol")) return WeaponClass::kPistol;
  return std::nullopt;
}

}  // namespace obb
