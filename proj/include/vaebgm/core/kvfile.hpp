#ifndef VAEBGM_CORE_KVFILE_HPP
#define VAEBGM_CORE_KVFILE_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/text.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace vaebgm {

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// ignored. Keys are unique; insertion order is preserved for writing.
class KeyValueFile {
  public:
    static KeyValueFile parse(std::istream &in, const std::string &source = "<stream>") {
        KeyValueFile kv;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto body = trim(line);
            if (body.empty() || body.front() == '#') {
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) {
                throw InputError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
            }
            const std::string key(trim(body.substr(0, eq)));
            const std::string value(trim(body.substr(eq + 1)));
            if (key.empty()) {
                throw InputError(source + ":" + std::to_string(line_no) + ": empty key");
            }
            if (kv.contains(key)) {
                throw InputError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
            kv.set(key, value);
        }
        return kv;
    }

    static KeyValueFile load(const std::filesystem::path &path) {
        std::ifstream in(path);
        if (!in) {
            throw InputError("cannot open '" + path.string() + "'");
        }
        return parse(in, path.string());
    }

    void set(const std::string &key, std::string value) {
        const auto it = index_.find(key);
        if (it != index_.end()) {
            entries_[it->second].second = std::move(value);
            return;
        }
        index_.emplace(key, entries_.size());
        entries_.emplace_back(key, std::move(value));
    }

    [[nodiscard]] bool contains(const std::string &key) const { return index_.count(key) > 0; }

    [[nodiscard]] std::optional<std::string> get(const std::string &key) const {
        const auto it = index_.find(key);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return entries_[it->second].second;
    }

    [[nodiscard]] const std::string &require(const std::string &key) const {
        const auto it = index_.find(key);
        if (it == index_.end()) {
            throw InputError("missing key '" + key + "'");
        }
        return entries_[it->second].second;
    }

    [[nodiscard]] double require_double(const std::string &key) const {
        const auto v = parse_double(require(key));
        if (!v) {
            throw InputError("key '" + key + "': not a number");
        }
        return *v;
    }

    [[nodiscard]] long long require_int(const std::string &key) const {
        const auto v = parse_int(require(key));
        if (!v) {
            throw InputError("key '" + key + "': not an integer");
        }
        return *v;
    }

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>> &entries() const { return entries_; }

    void write(std::ostream &out) const {
        for (const auto &[k, v] : entries_) {
            out << k << " = " << v << '\n';
        }
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace vaebgm

#endif
