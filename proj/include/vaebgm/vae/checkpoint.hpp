#ifndef VAEBGM_VAE_CHECKPOINT_HPP
#define VAEBGM_VAE_CHECKPOINT_HPP

#include "vaebgm/core/container.hpp"
#include "vaebgm/core/error.hpp"
#include "vaebgm/vae/model.hpp"

#include <memory>
#include <string>

namespace vaebgm::vae {

inline constexpr const char *kCheckpointFormat = "vaebgm-vae/1";

inline void write_layer(Container &c, const Layer &layer) {
    auto &s = c.add_section("layer." + layer.name);
    s.fields.set("activation", numerics::to_string(layer.activation));
    s.fields.set("dropout_rate", format_double(layer.dropout_rate));
    s.add_matrix("weight", layer.weight);
    s.add_matrix("bias", layer.bias.transpose());
}

inline void read_layer(const Container &c, Layer &layer) {
    const auto &s = c.section("layer." + layer.name);
    if (numerics::parse_activation(s.fields.require("activation")) != layer.activation) {
        throw ArtifactMismatch("layer '" + layer.name + "': activation differs from the architecture");
    }
    const auto &w = s.matrix("weight");
    const auto &b = s.matrix("bias");
    if (w.rows() != layer.weight.rows() || w.cols() != layer.weight.cols() || b.rows() != 1 || b.cols() != layer.bias.size()) {
        throw ArtifactMismatch("layer '" + layer.name + "': parameter shape differs from the architecture");
    }
    layer.weight = w;
    layer.bias = b.row(0).transpose();
    layer.dropout_rate = s.fields.require_double("dropout_rate");
}

/// Appends the model's schema, configuration and parameter blocks.
inline void write_vae(Container &c, const VaeModel &m) {
    auto &head = c.add_section("vae");
    head.fields.set("format", kCheckpointFormat);
    head.fields.set("schema_hash", m.schema().hash());
    m.config().write_to(head.fields);
    auto &schema = c.add_section("schema");
    schema.fields = m.schema().to_kv();
    for (const auto *layer : m.parameters()) write_layer(c, *layer);
}

/// Rebuilds a model from a container; verifies format and schema hash.
inline VaeModel read_vae(const Container &c) {
    const auto &head = c.section("vae");
    if (head.fields.require("format") != kCheckpointFormat) {
        throw ArtifactMismatch("unsupported checkpoint format '" + head.fields.require("format") + "'");
    }
    auto schema = std::make_shared<const data::TableSchema>(data::TableSchema::from_kv(c.section("schema").fields));
    if (schema->hash() != head.fields.require("schema_hash")) {
        throw ArtifactMismatch("checkpoint schema hash does not match its embedded schema");
    }
    VaeConfig cfg;
    cfg.read_from(head.fields);
    VaeModel m(schema, cfg, 0);
    for (auto *layer : m.parameters()) read_layer(c, *layer);
    return m;
}

}  // namespace vaebgm::vae

#endif
