#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "folio/rag/types.hpp"

namespace folio::rag {

// Ordered turns whose roles alternate User, Assistant, User, ...
class ChatSession {
 public:
  explicit ChatSession(std::string id) : id_(std::move(id)) {}

  const std::string& id() const noexcept { return id_; }

  // Throws AlternationViolation when the role does not follow the last turn,
  // or when a User turn carries citations.
  void append(Turn turn);
  void pop_back();

  std::vector<Turn> turns() const;
  std::vector<Turn> last(std::size_t n) const;
  std::size_t size() const;

  // Held for the whole of a question/answer exchange so concurrent messages
  // to one session queue up behind each other.
  std::mutex& exchange_mutex() noexcept { return exchange_mu_; }

 private:
  std::string id_;
  mutable std::mutex mu_;
  std::mutex exchange_mu_;
  std::vector<Turn> turns_;
};

class SessionRegistry {
 public:
  std::shared_ptr<ChatSession> create();

  // Throws SessionNotFound.
  std::shared_ptr<ChatSession> get(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<ChatSession>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace folio::rag
