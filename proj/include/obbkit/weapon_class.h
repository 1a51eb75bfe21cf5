#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace obb {

enum class WeaponClass { kGun, kPistol, kBackground };

// Classes that can appear on annotated objects and detections.
inline constexpr std::array<WeaponClass, 2> kObjectClasses = {
    WeaponClass::kGun, WeaponClass::kPistol};

// "Gun", "Pistol", "Background".
std::string_view to_string(WeaponClass c);

// Case-insensitive match on "gun" / "pistol". Background is never parsed.
std::optional<WeaponClass> parse_object_class(std::string_view name);

}  // namespace obb
