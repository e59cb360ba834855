#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "errmax/active_loop.hpp"
#include "errmax/error.hpp"
#include "errmax/miner.hpp"
#include "errmax/nn.hpp"
#include "errmax/oracle.hpp"

namespace errmax {

// JSON mapping of the typed configs. Readers start from the struct's defaults,
// overwrite only the keys present, reject unknown keys (InvalidSpec naming
// the offending path) and validate the result.

nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const AscentConfig& cfg);
nlohmann::json to_json(const FdConfig& cfg);
nlohmann::json to_json(const RoundConfig& cfg);

TrainConfig train_config_from_json(const nlohmann::json& j, std::string_view path = "train");
AscentConfig ascent_config_from_json(const nlohmann::json& j, std::string_view path = "mine");
FdConfig fd_config_from_json(const nlohmann::json& j, std::string_view path = "oracle.fd");
RoundConfig round_config_from_json(const nlohmann::json& j, std::string_view path = "loop");

/// Throws InvalidSpec if `j` is not an object or has a key outside `allowed`.
void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, std::string_view path);

/// Typed field read with a readable InvalidSpec on type mismatch.
template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, std::string_view path) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    bool ok = true;
    if constexpr (std::is_same_v<T, bool>) {
        ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
        ok = v.is_number_unsigned() || (std::is_signed_v<T> && v.is_number_integer());
    } else if constexpr (std::is_floating_point_v<T>) {
        ok = v.is_number();
    }
    if (!ok) fail(ErrorKind::InvalidSpec, std::string(path) + "." + key + " has the wrong type");
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::InvalidSpec, std::string(path) + "." + key + " has the wrong type");
    }
}

}  // namespace errmax
