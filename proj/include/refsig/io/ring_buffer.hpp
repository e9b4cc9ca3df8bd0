#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace refsig::io
{
/// Bounded broadcast queue: one producer, a fixed set of consumers, each of
/// which receives every element in production order. The producer blocks
/// while the slowest consumer is a full buffer behind.
template <typename T>
class BroadcastRing
{
public:
        BroadcastRing(const std::size_t capacity, const std::size_t consumers)
                : slots_(capacity), cursors_(consumers, 0)
        {
                if (capacity == 0 || consumers == 0)
                {
                        throw std::invalid_argument("ring needs a positive capacity and at least one consumer");
                }
        }

        void push(T value)
        {
                std::unique_lock lock(mutex_);
                not_full_.wait(lock, [&] { return head_ - slowest() < slots_.size(); });
                slots_[head_ % slots_.size()] = std::move(value);
                ++head_;
                not_empty_.notify_all();
        }

        /// No further elements will be pushed; consumers drain and then see
        /// an empty result.
        void close()
        {
                std::lock_guard lock(mutex_);
                closed_ = true;
                not_empty_.notify_all();
        }

        /// Next element for consumer c, or nothing once closed and drained.
        std::optional<T> pop(const std::size_t c)
        {
                std::unique_lock lock(mutex_);
                not_empty_.wait(lock, [&] { return cursors_.at(c) < head_ || closed_; });
                if (cursors_[c] == head_)
                {
                        return std::nullopt;
                }
                T value = slots_[cursors_[c] % slots_.size()];
                ++cursors_[c];
                not_full_.notify_one();
                return value;
        }

        [[nodiscard]] std::size_t capacity() const
        {
                return slots_.size();
        }

private:
        [[nodiscard]] std::size_t slowest() const
        {
                std::size_t m = head_;
                for (const std::size_t c : cursors_)
                {
                        m = c < m ? c : m;
                }
                return m;
        }

        std::vector<T> slots_;
        std::vector<std::size_t> cursors_;
        std::size_t head_ = 0;
        bool closed_ = false;
        std::mutex mutex_;
        std::condition_variable not_full_;
        std::condition_variable not_empty_;
};
}
