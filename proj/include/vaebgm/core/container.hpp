#ifndef VAEBGM_CORE_CONTAINER_HPP
#define VAEBGM_CORE_CONTAINER_HPP

#include "vaebgm/core/error.hpp"
#include "vaebgm/core/kvfile.hpp"
#include "vaebgm/core/linalg.hpp"
#include "vaebgm/core/text.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace vaebgm {

/// Self-describing text container shared by checkpoints and fitted mixtures.
///
///     vaebgm-container 1
///     @section <name>
///     <key> = <value>
///     @matrix <name> <rows> <cols>
///     <one line per row, values separated by single spaces>
///     @end
///
/// Reals are written in shortest round-trip form, so a reload is bit-identical.
struct ContainerSection {
    std::string name;
    KeyValueFile fields;
    std::vector<std::pair<std::string, Dense2D>> matrices;

    [[nodiscard]] const Dense2D &matrix(const std::string &key) const {
        for (const auto &[k, m] : matrices) {
            if (k == key) return m;
        }
        throw ArtifactMismatch("section '" + name + "': missing matrix '" + key + "'");
    }

    [[nodiscard]] bool has_matrix(const std::string &key) const {
        for (const auto &[k, m] : matrices) {
            if (k == key) return true;
        }
        return false;
    }

    void add_matrix(std::string key, Dense2D m) { matrices.emplace_back(std::move(key), std::move(m)); }
};

class Container {
  public:
    std::vector<ContainerSection> sections;

    ContainerSection &add_section(std::string name) {
        sections.push_back(ContainerSection{std::move(name), {}, {}});
        return sections.back();
    }

    [[nodiscard]] const ContainerSection *find(const std::string &name) const {
        for (const auto &s : sections) {
            if (s.name == name) return &s;
        }
        return nullptr;
    }

    [[nodiscard]] const ContainerSection &section(const std::string &name) const {
        const auto *s = find(name);
        if (s == nullptr) throw ArtifactMismatch("container: missing section '" + name + "'");
        return *s;
    }

    [[nodiscard]] ContainerSection &section(const std::string &name) {
        return const_cast<ContainerSection &>(std::as_const(*this).section(name));
    }

    void remove(const std::string &name) {
        std::erase_if(sections, [&](const auto &s) { return s.name == name; });
    }

    void write(std::ostream &out) const {
        out << "vaebgm-container 1\n";
        for (const auto &s : sections) {
            out << "@section " << s.name << '\n';
            s.fields.write(out);
            for (const auto &[key, m] : s.matrices) {
                out << "@matrix " << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
                for (Index i = 0; i < m.rows(); ++i) {
                    for (Index j = 0; j < m.cols(); ++j) {
                        if (j > 0) out << ' ';
                        out << format_double(m(i, j));
                    }
                    out << '\n';
                }
            }
        }
        out << "@end\n";
    }

    void save(const std::filesystem::path &path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot write '" + path.string() + "'");
        write(out);
    }

    static Container read(std::istream &in, const std::string &source = "<stream>") {
        Container c;
        std::string line;
        if (!std::getline(in, line) || trim(line) != "vaebgm-container 1") {
            throw ArtifactMismatch(source + ": not a vaebgm container");
        }
        ContainerSection *cur = nullptr;
        std::size_t line_no = 1;
        std::string pending_kv;
        auto flush_kv = [&]() {
            if (cur != nullptr && !pending_kv.empty()) {
                std::istringstream is(pending_kv);
                cur->fields = KeyValueFile::parse(is, source);
            }
            pending_kv.clear();
        };
        bool ended = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.rfind("@section ", 0) == 0) {
                flush_kv();
                cur = &c.add_section(std::string(trim(line.substr(9))));
            } else if (line.rfind("@matrix ", 0) == 0) {
                if (cur == nullptr) throw ArtifactMismatch(source + ":" + std::to_string(line_no) + ": matrix outside section");
                const auto parts = split_string(trim(line.substr(8)), ' ');
                if (parts.size() != 3) throw ArtifactMismatch(source + ":" + std::to_string(line_no) + ": bad matrix header");
                const auto rows = parse_int(parts[1]);
                const auto cols = parse_int(parts[2]);
                if (!rows || !cols || *rows < 0 || *cols < 0) {
                    throw ArtifactMismatch(source + ":" + std::to_string(line_no) + ": bad matrix shape");
                }
                Dense2D m(*rows, *cols);
                for (long long i = 0; i < *rows; ++i) {
                    if (!std::getline(in, line)) throw ArtifactMismatch(source + ": truncated matrix '" + parts[0] + "'");
                    ++line_no;
                    const auto vals = *cols == 0 ? std::vector<std::string>{} : split_string(trim(line), ' ');
                    if (static_cast<long long>(vals.size()) != *cols) {
                        throw ArtifactMismatch(source + ":" + std::to_string(line_no) + ": wrong number of values");
                    }
                    for (long long j = 0; j < *cols; ++j) {
                        const auto v = parse_double(vals[static_cast<std::size_t>(j)]);
                        if (!v) throw ArtifactMismatch(source + ":" + std::to_string(line_no) + ": bad number");
                        m(i, j) = *v;
                    }
                }
                cur->add_matrix(parts[0], std::move(m));
            } else if (trim(line) == "@end") {
                ended = true;
                break;
            } else {
                if (cur == nullptr) {
                    if (trim(line).empty()) continue;
                    throw ArtifactMismatch(source + ":" + std::to_string(line_no) + ": field outside section");
                }
                pending_kv += line;
                pending_kv += '\n';
            }
        }
        if (!ended) throw ArtifactMismatch(source + ": truncated container (no @end)");
        flush_kv();
        return c;
    }

    static Container load(const std::filesystem::path &path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot open '" + path.string() + "'");
        return read(in, path.string());
    }
};

}  // namespace vaebgm

#endif
