// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace nbstat::metrics {

// The documented built-in functions of the pinned Python version,
// embedded as data so results do not depend on a local interpreter.
class BuiltinRegistry {
public:
    static const BuiltinRegistry& standard();

    bool contains(std::string_view name) const {
        return names_.count(std::string(name)) > 0;
    }
    size_t size() const { return names_.size(); }
    const std::string& language_version() const { return version_; }

private:
    BuiltinRegistry(std::string version, std::unordered_set<std::string> names)
        : version_(std::move(version)), names_(std::move(names)) {}

    std::string version_;
    std::unordered_set<std::string> names_;
};

}  // namespace nbstat::metrics
