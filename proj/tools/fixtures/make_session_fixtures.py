#!/usr/bin/env python3
"""Writes the scripted session fixtures under tests/fixtures/sessions/.

Each fixture is a list of user turns with the backend replies they trigger
(extraction, optional lyrics generation, dialogue). Call indices follow the
order the session service issues them: the opening reply is call 0, then per
user turn extraction, generation (when lyrics are written) and the reply.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "sessions"
USER = "Parang"

OPENING = ("Hi Parang, it's good to meet you. What has been on your mind lately, and how did it make you feel? "
           "For example, 'a trip', 'work', 'time with friends'.")

LYRICS_V1 = """[Verse]
Rough waves roll in the grey morning
I keep my voice inside

[Chorus]
Calm light finds me
I am still here
Peaceful blue sky"""

LYRICS_V2 = """[Verse]
Rough waves roll in the grey morning
I hold my breath and wait

[Chorus]
Calm light finds me
I am still here
Peaceful blue sky

[Bridge]
The storm will pass"""


def t(user, extract, agent, generate=None):
    return {"user": user, "extract": extract, "agent": agent, "generate": generate}


CONNECTION = [
    t("I went hiking last weekend and felt free. Sure, I would like to try making a song.",
      {"user_ready": "ready to write a song, inspired by feeling free while hiking"},
      "That sounds like a freeing moment, thank you for sharing it. Has anything felt difficult for you recently?"),
    t("Work has been really stressful lately.",
      {"motivation": None, "difficulty": "stress at work", "emotion": None},
      "I'm sorry work has been so heavy. How have you been feeling? For example, 'tired', 'anxious', 'hopeful'."),
    t("anxious, and a bit tired",
      {"motivation": None, "emotion": "anxious and tired"},
      "Thank you for telling me. What would you like this song to do for you? "
      "For example, 'let feelings out', 'find hope', 'express myself'."),
    t("I want to let the stress out and feel hopeful again.",
      {"motivation": "release stress and feel hopeful again"},
      "That is a wonderful reason to write a song. Has music ever helped you? What music do you like or dislike?"),
    t("Piano ballads help me when I am down. I don't like heavy metal.",
      {"music_info": "piano ballads comfort them; dislikes heavy metal"},
      "Piano ballads can be so comforting. Let's think about the song's concept. "
      "For example, 'after the storm', 'quiet strength', 'a new morning'."),
]


def lyrics_steps(concept_user, concept, keywords_user, keywords, sentence_user, sentence, flow_user, flow, lyrics,
                 share):
    return [
        t(concept_user, {"concept": concept},
          "I love that concept. What kind of image comes to mind? For example, 'rough waves', 'grey morning', 'blue sky'."),
        t(keywords_user, {"lyrics_keyword": keywords, "lyrics_sentence": None, "lyrics_flow": None},
          "Those images are vivid. Could you write two or three short sentences using them?"),
        t(sentence_user, {"lyrics_sentence": sentence, "lyrics_flow": None},
          "Beautiful lines. How should the feeling move through the song? "
          "For example, 'heavy to peaceful', 'quiet to strong'."),
        t(flow_user, {"lyrics_flow": flow}, share, generate=lyrics),
    ]


LYRICS_FIRST = lyrics_steps(
    "A song about finding calm after a storm.", "finding calm after a storm",
    "rough waves, grey morning, calm light, blue sky", "rough waves, grey morning, calm light, blue sky",
    "Rough waves roll in. I keep my voice inside. I am still here.",
    "Rough waves roll in. I keep my voice inside. I am still here.",
    "Start heavy, then slowly become peaceful.", "heavy at first, slowly becoming peaceful",
    LYRICS_V1,
    "Here are the lyrics made from your words:\n" + LYRICS_V1 + "\nWhat do you think? Would you change anything?")

APPROVE_LYRICS = t("I love it, it feels like me. No changes.",
                   {"discussion_feedback": "loves the lyrics, feels personal", "lyrics_flag": {"changeNeeded": False}},
                   "I'm so glad. Now let's shape the music. What genre, tempo and instruments do you imagine? "
                   "For example, 'slow piano ballad', 'soft acoustic', 'warm strings'.")


def music_steps(concept_user, concept, title, song_reply):
    return [
        t(concept_user, {"title": None, "music_concept": concept},
          "That sounds lovely. What would you like to call the song?"),
        t("Let's call it " + title + ".", {"title": title}, song_reply),
    ]


MUSIC_FIRST = music_steps("A slow piano ballad, emotional, with soft vocals.",
                          "slow piano ballad, emotional, soft vocals", "Still Here",
                          "Your song 'Still Here' is ready. Take your time to listen and watch the lyrics. "
                          "Would you like to change anything in the lyrics or the music?")

NO_CHANGES = t("No changes, I like it as it is.",
               {"music_recreation": {"reviseLyrics": False, "reviseMusic": False, "notes": ""}},
               "I'm happy you like it. Which lyrics or sounds feel most meaningful to you?")

REFLECTION = [
    t("The line 'I am still here' touched me.",
      {"music_opinion": "the line 'I am still here' touched them", "reflection": None},
      "That line carries a lot of strength. What did you discover about yourself while making this song?"),
    t("I realized I am stronger than I thought.",
      {"reflection": "realized they are stronger than they thought"},
      "Thank you for creating this song with me, Parang. How are you feeling right now? "
      "You did something brave today."),
]

LYRICS_LOOP_FEEDBACK = t(
    "The second line feels too closed. Please change it.",
    {"discussion_feedback": "second line feels too closed", "lyrics_flag": {"changeNeeded": True}},
    "Of course, we can change it while keeping your intent. Which images should the new lyrics use?")

LYRICS_SECOND = [
    t("rough waves, holding my breath, calm light", {"lyrics_keyword": "rough waves, holding breath, calm light",
                                                     "lyrics_sentence": None, "lyrics_flow": None},
      "Good choices. Could you write two or three short sentences with them?"),
    t("I hold my breath and wait. Calm light finds me. The storm will pass.",
      {"lyrics_sentence": "I hold my breath and wait. Calm light finds me. The storm will pass.", "lyrics_flow": None},
      "Those lines are strong. How should the feeling move now?"),
    t("Heavy at first, then hopeful at the end.", {"lyrics_flow": "heavy at first, hopeful at the end"},
      "Here are the new lyrics:\n" + LYRICS_V2 + "\nHow do they feel to you?", generate=LYRICS_V2),
]

APPROVE_LYRICS_V2 = t("Yes, this is better. Keep it.",
                      {"discussion_feedback": "the new version is better", "lyrics_flag": {"changeNeeded": False}},
                      "Wonderful. Let's shape the music. What genre and instruments do you imagine? "
                      "For example, 'slow piano ballad', 'soft acoustic'.")

REVISE_LYRICS = t("I want to change the lyrics, the verse should be more hopeful.",
                  {"music_recreation": {"reviseLyrics": True, "reviseMusic": False, "notes": "make the verse more hopeful"}},
                  "Of course. Let's revisit the concept of the song. What should it be about now?")

REVISE_MUSIC = t("Could the music be faster, with acoustic guitar?",
                 {"music_recreation": {"reviseLyrics": False, "reviseMusic": True, "notes": "faster, acoustic guitar"}},
                 "Sure. Let's shape the music again. What style would you like now?")

FIXTURES = {
    "full": CONNECTION + LYRICS_FIRST + [APPROVE_LYRICS] + MUSIC_FIRST + [NO_CHANGES] + REFLECTION,
    "lyrics-loop": CONNECTION + LYRICS_FIRST + [LYRICS_LOOP_FEEDBACK] + LYRICS_SECOND + [APPROVE_LYRICS_V2]
    + MUSIC_FIRST + [NO_CHANGES] + REFLECTION,
    "revert-lyrics": CONNECTION + LYRICS_FIRST + [APPROVE_LYRICS] + MUSIC_FIRST + [REVISE_LYRICS]
    + lyrics_steps("A song about hope after a storm.", "hope after a storm",
                   "rough waves, holding my breath, calm light", "rough waves, holding breath, calm light",
                   "I hold my breath and wait. Calm light finds me. The storm will pass.",
                   "I hold my breath and wait. Calm light finds me. The storm will pass.",
                   "Heavy at first, then hopeful at the end.", "heavy at first, hopeful at the end",
                   LYRICS_V2, "Here are the new lyrics:\n" + LYRICS_V2 + "\nHow do they feel?")
    + [APPROVE_LYRICS_V2]
    + music_steps("A slow piano ballad, hopeful, with soft vocals.", "slow piano ballad, hopeful, soft vocals",
                  "Still Here", "Your new version of 'Still Here' is ready. Would you change anything else?")
    + [NO_CHANGES] + REFLECTION,
    "revert-music": CONNECTION + LYRICS_FIRST + [APPROVE_LYRICS] + MUSIC_FIRST + [REVISE_MUSIC]
    + music_steps("An upbeat acoustic guitar song, hopeful, fast tempo, warm vocals.",
                  "upbeat acoustic guitar, hopeful, fast tempo, warm vocals", "Still Here",
                  "The new version of 'Still Here' is ready. Would you change anything else?")
    + [NO_CHANGES] + REFLECTION,
}


def build(turns):
    entries = [{"call": 0, "kind": "dialogue", "reply": OPENING}]
    call = 1
    for turn in turns:
        entries.append({"call": call, "kind": "extraction", "reply": turn["extract"]})
        call += 1
        if turn["generate"] is not None:
            entries.append({"call": call, "kind": "generation", "reply": turn["generate"]})
            call += 1
        entries.append({"call": call, "kind": "dialogue", "reply": turn["agent"]})
        call += 1
    script = {"format": "songcraft-replay-script", "version": 1, "entries": entries}
    return script, [turn["user"] for turn in turns]


def main():
    for name, turns in FIXTURES.items():
        script, users = build(turns)
        out = ROOT / name
        out.mkdir(parents=True, exist_ok=True)
        (out / "script.json").write_text(json.dumps(script, indent=2, ensure_ascii=False) + "\n")
        (out / "turns.json").write_text(json.dumps(
            {"userName": USER, "sessionId": name, "turns": users}, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
