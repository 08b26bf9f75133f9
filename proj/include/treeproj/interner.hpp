// interner.hpp - process-wide token interning for relation values
#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <unordered_map>

namespace treeproj {

using Tok = std::int32_t;

// Values are opaque strings; relations store interned ids. Ids are stable for
// the lifetime of the process, so id equality is token equality. Any ordering
// exposed to the outside (serialization, tie-breaks) compares the underlying
// strings, never the ids.
class Interner {
public:
    static Interner& instance() {
        static Interner it;
        return it;
    }

    Tok id(std::string_view s) {
        auto found = map_.find(s);
        if (found != map_.end())
            return found->second;
        strings_.emplace_back(s);
        Tok t = static_cast<Tok>(strings_.size()) - 1;
        map_.emplace(strings_.back(), t);
        return t;
    }

    const std::string& str(Tok t) const { return strings_[static_cast<size_t>(t)]; }

private:
    Interner() = default;
    std::unordered_map<std::string_view, Tok> map_;
    std::deque<std::string> strings_; // deque: stable addresses for the views in map_
};

inline Tok tok(std::string_view s) { return Interner::instance().id(s); }
inline const std::string& tok_str(Tok t) { return Interner::instance().str(t); }

} // namespace treeproj
