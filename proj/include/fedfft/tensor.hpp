#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "fedfft/error.hpp"

namespace fedfft {

class TensorShape {
public:
    TensorShape() = default;
    explicit TensorShape(std::vector<std::size_t> dims);
    TensorShape(std::initializer_list<std::size_t> dims)
        : TensorShape(std::vector<std::size_t>(dims)) {}

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t numel() const noexcept { return numel_; }

    friend bool operator==(const TensorShape&, const TensorShape&) = default;

private:
    std::vector<std::size_t> dims_;
    std::size_t numel_ = 0;
};

struct Layer {
    TensorShape shape;
    std::vector<double> data;  // row-major

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Ordered list of layer tensors. Construction checks that every data array
/// matches its shape and that every value is finite; instances are not
/// mutated afterwards.
class ModelWeights {
public:
    ModelWeights() = default;
    explicit ModelWeights(std::vector<Layer> layers);

    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const Layer& layer(std::size_t l) const { return layers_.at(l); }
    std::size_t num_layers() const noexcept { return layers_.size(); }
    std::size_t parameter_count() const noexcept;

    double at(std::size_t layer, std::size_t index) const { return layers_.at(layer).data.at(index); }

    bool same_shape(const ModelWeights& other) const noexcept;

    /// All coordinates concatenated in layer-major, row-major order.
    std::vector<double> flatten() const;
    /// Inverse of flatten() using this object's shapes.
    ModelWeights unflatten(std::span<const double> flat) const;

    friend bool operator==(const ModelWeights&, const ModelWeights&) = default;

private:
    std::vector<Layer> layers_;
};

ModelWeights zeros_like(const ModelWeights& w);

struct ClientUpdate {
    ClientUpdate(std::size_t client_id, ModelWeights weights, std::size_t dataset_size);

    std::size_t client_id;
    ModelWeights weights;
    std::size_t dataset_size;
};

/// Values of one weight position (layer, index) across all clients, in the
/// caller's client order.
struct CoordinateVector {
    std::size_t layer_index = 0;
    std::size_t coord_index = 0;
    std::vector<double> values;
};

struct CoordinateKey {
    std::size_t layer = 0;
    std::size_t index = 0;

    friend auto operator<=>(const CoordinateKey&, const CoordinateKey&) = default;
};

// Throws EmptyUpdateSet or ShapeMismatchError (carrying the offending client
// id and layer index, relative to the first update).
void validate_uniform(std::span<const ClientUpdate> updates);

/// Streams coordinate vectors one at a time (layer-major, then index order),
/// so only O(K) values are materialized per step.
class CoordinateStream {
public:
    explicit CoordinateStream(std::span<const ClientUpdate> updates);

    bool next(CoordinateVector& out);
    void reset() noexcept { layer_ = 0; index_ = 0; }
    std::size_t total() const noexcept { return total_; }

private:
    std::span<const ClientUpdate> updates_;
    std::size_t layer_ = 0;
    std::size_t index_ = 0;
    std::size_t total_ = 0;
};

std::vector<CoordinateVector> coordinate_views(std::span<const ClientUpdate> updates);

// Applies `reduce` to every coordinate vector and assembles the results with
// the shapes of the first update.
ModelWeights coordinate_wise(std::span<const ClientUpdate> updates,
                             const std::function<double(const CoordinateVector&)>& reduce);

ModelWeights reassemble(const ModelWeights& tmpl, const std::map<CoordinateKey, double>& selected);

double l2_norm(const ModelWeights& w);
double squared_distance(const ModelWeights& a, const ModelWeights& b);
ModelWeights scale(const ModelWeights& w, double c);
ModelWeights add(const ModelWeights& a, const ModelWeights& b);
ModelWeights sub(const ModelWeights& a, const ModelWeights& b);

}  // namespace fedfft
