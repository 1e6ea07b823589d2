#pragma once

// Without-replacement mini-batch sampling. One epoch emits disjoint batches
// covering every index exactly once; the last batch may be short. Reshuffling
// happens only at epoch boundaries, keyed by (seed, epoch), and the batch size
// may change only between epochs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/rng.hpp"

namespace hyperlearn {

class BatchSampler {
public:
    BatchSampler(std::size_t num_items, std::size_t batch_size, std::uint64_t seed)
        : num_items_(num_items), batch_size_(batch_size), seed_(seed) {
        if (num_items == 0) throw validation_error("sampler: empty index set");
        if (batch_size == 0) throw validation_error("sampler: batch size must be >= 1");
        permutation_.resize(num_items);
        for (std::size_t i = 0; i < num_items; ++i) permutation_[i] = i;
    }

    void start_epoch(std::uint64_t epoch) {
        rng::Stream rs(rng::derive(seed_, 0x0E9Cu, epoch));
        rs.shuffle(permutation_);
        cursor_ = 0;
        exhausted_reported_ = false;
        started_ = true;
    }

    // Next batch of indices; nullopt exactly once at epoch end.
    std::optional<std::vector<std::size_t>> next() {
        if (!started_) throw std::logic_error("sampler: next() before start_epoch()");
        if (cursor_ >= num_items_) {
            if (exhausted_reported_) {
                throw std::logic_error("sampler: batch requested after exhaustion without reset");
            }
            exhausted_reported_ = true;
            return std::nullopt;
        }
        const std::size_t take = std::min(batch_size_, num_items_ - cursor_);
        std::vector<std::size_t> batch(permutation_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                       permutation_.begin() +
                                           static_cast<std::ptrdiff_t>(cursor_ + take));
        cursor_ += take;
        return batch;
    }

    void set_batch_size(std::size_t b) {
        if (b == 0) throw validation_error("sampler: batch size must be >= 1");
        if (cursor_ != 0 && cursor_ < num_items_) {
            throw std::logic_error("sampler: batch size may change only between epochs");
        }
        batch_size_ = b;
    }

    std::size_t batch_size() const { return batch_size_; }
    std::size_t num_items() const { return num_items_; }
    std::size_t batches_per_epoch() const { return (num_items_ + batch_size_ - 1) / batch_size_; }

private:
    std::size_t num_items_;
    std::size_t batch_size_;
    std::uint64_t seed_;
    std::vector<std::size_t> permutation_;
    std::size_t cursor_ = 0;
    bool started_ = false;
    bool exhausted_reported_ = false;
};

// Endless without-replacement cycler for validation mini-batches: when a pass
// over the set is exhausted it reshuffles and continues.
class CyclingSampler {
public:
    CyclingSampler(std::size_t num_items, std::size_t batch_size, std::uint64_t seed)
        : sampler_(num_items, std::min(batch_size, num_items), seed) {
        sampler_.start_epoch(pass_);
    }

    std::vector<std::size_t> next() {
        auto batch = sampler_.next();
        if (!batch) {
            sampler_.start_epoch(++pass_);
            batch = sampler_.next();
        }
        return *batch;
    }

private:
    BatchSampler sampler_;
    std::uint64_t pass_ = 0;
};

}  // namespace hyperlearn
