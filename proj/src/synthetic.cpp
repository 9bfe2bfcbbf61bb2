#include "advneg/synthetic.hpp"

#include <array>

#include "advneg/errors.hpp"
#include "advneg/hash.hpp"
#include "advneg/rng.hpp"

namespace advneg {

namespace {

struct Topic {
  const char* name;
  std::array<const char*, 8> words;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> kTopics = {
      {"travel", {"airport", "flight", "ticket", "luggage", "passport", "hotel", "journey", "vacation"}},
      {"cooking", {"recipe", "kitchen", "dinner", "oven", "spices", "flavor", "ingredients", "dessert"}},
      {"weather", {"rain", "storm", "sunshine", "forecast", "temperature", "clouds", "umbrella", "wind"}},
      {"music", {"concert", "guitar", "melody", "rhythm", "band", "album", "singer", "stage"}},
      {"sports", {"match", "stadium", "training", "coach", "score", "tournament", "referee", "goal"}},
      {"work", {"office", "meeting", "deadline", "manager", "salary", "project", "interview", "colleague"}},
      {"school", {"teacher", "homework", "exam", "lecture", "campus", "semester", "library", "notebook"}},
      {"health", {"doctor", "hospital", "medicine", "symptoms", "appointment", "recovery", "exercise", "vitamins"}},
      {"shopping", {"store", "discount", "price", "receipt", "cashier", "mall", "purchase", "brand"}},
      {"garden", {"flowers", "soil", "seeds", "watering", "lawn", "roses", "vegetables", "harvest"}},
      {"cars", {"engine", "garage", "mechanic", "traffic", "highway", "fuel", "brakes", "license"}},
      {"movies", {"cinema", "actor", "director", "screenplay", "premiere", "audience", "trailer", "scene"}},
      {"pets", {"puppy", "kitten", "veterinarian", "leash", "aquarium", "feathers", "cage", "treats"}},
      {"finance", {"budget", "savings", "investment", "account", "loan", "expenses", "bank", "receipts"}},
      {"technology", {"computer", "software", "keyboard", "password", "download", "server", "update", "screen"}},
      {"books", {"novel", "author", "chapter", "paperback", "bookstore", "plot", "character", "shelf"}},
      {"food", {"restaurant", "waiter", "menu", "breakfast", "lunch", "salad", "coffee", "pancakes"}},
      {"camping", {"tent", "campfire", "backpack", "trail", "lantern", "sleeping", "forest", "compass"}},
      {"painting", {"canvas", "brush", "palette", "gallery", "portrait", "sketch", "easel", "colors"}},
      {"fishing", {"river", "bait", "hook", "boat", "lake", "rod", "catch", "shore"}},
      {"wedding", {"bride", "groom", "ceremony", "bouquet", "reception", "invitation", "cake", "venue"}},
      {"photography", {"camera", "lens", "tripod", "shutter", "exposure", "portraits", "lighting", "film"}},
      {"chess", {"board", "knight", "bishop", "checkmate", "opening", "endgame", "pawn", "clock"}},
      {"astronomy", {"telescope", "planets", "orbit", "galaxy", "eclipse", "comet", "stars", "moon"}},
  };
  return kTopics;
}

const std::vector<const char*>& context_frames() {
  static const std::vector<const char*> kFrames = {
      "Have you checked the {1} yet?",
      "I think the {1} near the {2} was great.",
      "Let's sort out the {1} before tomorrow.",
      "The {1} looked much better than the {2} we saw.",
      "Someone told me the {1} costs too much these days.",
      "Do you remember where we put the {1}?",
      "I spent the whole morning dealing with the {1}.",
      "What do you think about the new {1}?",
  };
  return kFrames;
}

const std::vector<const char*>& positive_frames() {
  static const std::vector<const char*> kFrames = {
      "Sure, the {1} sounds perfect, let's plan around the {2}.",
      "I already handled the {1}, so we are set.",
      "Good idea, I will bring the {1} along with the {2}.",
      "Honestly the {1} was the best part for me.",
      "Yes, and we should double-check the {1} as well.",
      "Fine by me, as long as the {1} is ready on time.",
  };
  return kFrames;
}

const std::vector<const char*>& adversarial_frames() {
  static const std::vector<const char*> kFrames = {
      "My uncle wrote a long letter about the {1} in his youth.",
      "There was a documentary about the {1} and the {2} on last night.",
      "The museum downtown has a whole room devoted to the {1}.",
      "I read that the {1} industry is struggling with the {2} lately.",
      "Our neighbor painted a {1} on his fence next to the {2}.",
      "A magazine ranked the {1} as the most popular {2} this year.",
      "The {1} my sister mentioned had nothing to do with the {2}.",
  };
  return kFrames;
}

std::string fill(const std::string& frame, const std::string& w1, const std::string& w2) {
  std::string out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame[i] == '{' && i + 2 < frame.size() && frame[i + 2] == '}') {
      out += frame[i + 1] == '1' ? w1 : w2;
      i += 2;
    } else {
      out += frame[i];
    }
  }
  return out;
}

}  // namespace

Corpus make_synthetic_corpus(const SyntheticOptions& options) {
  if (options.records == 0) throw Error("synthetic corpus: records must be >= 1");
  Corpus corpus;
  corpus.split = options.split;
  SeededRng rng(derive_seed(options.seed, "synthetic-corpus"));
  const auto& bank = topics();
  for (std::size_t i = 0; i < options.records; ++i) {
    const Topic& topic = bank[i % bank.size()];
    auto word = [&]() -> std::string {
      return topic.words[rng.uniform_below(topic.words.size())];
    };
    DialogueRecord r;
    r.id = "syn-" + std::to_string(i);
    r.source = Source::synthetic;
    std::size_t turns = 2 + rng.uniform_below(3);
    Speaker sp = Speaker::A;
    for (std::size_t t = 0; t < turns; ++t) {
      const auto& frames = context_frames();
      r.context.push_back(
          {sp, fill(frames[rng.uniform_below(frames.size())], word(), word())});
      sp = other_speaker(sp);
    }
    for (int p = 0; p < 2; ++p) {
      const auto& frames = positive_frames();
      r.positives.push_back(fill(frames[rng.uniform_below(frames.size())], word(), word()));
    }
    bool bearing = rng.uniform01() < options.adversarial_share;
    if (bearing) {
      const auto& frames = adversarial_frames();
      for (int a = 0; a < 5; ++a) {
        // off-topic second slot keeps these incoherent as replies
        const Topic& other = bank[rng.uniform_below(bank.size())];
        std::string w2 = other.words[rng.uniform_below(other.words.size())];
        r.adversarial_negatives.push_back(
            fill(frames[rng.uniform_below(frames.size())], word(), w2));
      }
    }
    corpus.records.push_back(std::move(r));
  }
  corpus.rebuild_pool();
  return corpus;
}

}  // namespace advneg
