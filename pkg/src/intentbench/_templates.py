"""Template families for the synthetic corpus.

Each intent draws from its own phrasing family. Conversation deliberately
includes summarization and inline phrase translation, which are the cases a
router most easily confuses with document translation.
"""
from __future__ import annotations

import random

from .dataset import IntentLabel

LANGS = ["English", "Spanish", "French", "German", "Italian", "Catalan", "Portuguese",
         "Chinese", "Japanese", "Czech", "Polish", "Dutch"]
LANGS_ES = ["inglés", "francés", "alemán", "italiano", "catalán", "portugués", "chino", "japonés"]
CITIES = ["Barcelona", "Madrid", "Tarragona", "Munich", "Stuttgart", "Detroit", "Shanghai",
          "Tokyo", "Paris", "Lyon", "Turin", "Prague", "Valencia", "Girona", "Seville"]
TOPICS = ["regenerative braking", "crash test ratings", "ISO 26262", "lidar calibration",
          "battery thermal runaway", "tyre rolling resistance", "ADAS validation", "homologation",
          "vehicle dynamics", "pandas dataframes", "recursion", "Kalman filters", "the CAN bus",
          "aerodynamic drag", "torque vectoring", "Euro NCAP", "electric motors", "unit tests",
          "SQL joins", "fatigue analysis", "noise vibration and harshness", "hydrogen fuel cells"]
TASKS = ["merge two excel files", "read a csv in python", "plot a histogram", "write a regex for emails",
         "convert a date string", "compute a moving average", "sort a dictionary by value",
         "center a div", "rename files in bulk", "create a pivot table", "reverse a linked list",
         "format a table in LaTeX", "call a REST API", "schedule a cron job"]
PHRASES = ["good morning", "thank you very much", "where is the meeting room", "see you tomorrow",
           "the brakes are overheating", "I agree with the proposal", "happy birthday",
           "buenas tardes", "nice to meet you", "the test was successful", "ich verstehe nicht"]
DOC_WORDS = ["report", "brake_test", "contract", "manual", "invoice", "homologation", "specs",
             "minutes", "proposal", "datasheet", "crash_results", "presentation", "thesis",
             "procedure", "audit", "offer", "budget", "memo", "certificate", "summary_q3"]
DOC_EXTS = [".pdf", ".docx", ".pptx", ".xlsx", ".doc", ".txt"]
HOTELS = ["Hotel Arts", "NH Collection", "Hilton Garden Inn", "Ibis Styles", "Melia Sky",
          "the hotel next to the proving ground", "Holiday Inn Express"]
RESTAURANTS = ["La Boqueria bar", "El Celler", "the sushi place downtown", "Can Solé",
               "a vegetarian restaurant", "the steakhouse near the office"]
DATES = ["tomorrow", "next Monday", "the 14th of March", "this Friday", "next week",
         "the 3rd of June", "tonight", "Saturday", "el lunes", "mañana"]
FILLERS = ["", "", "", "hey, ", "hi AIDA, ", "please ", "hola, ", "quick question: ", "AIDA ",
           "hello! ", "ok so ", "bon dia, "]
TAILS = ["", "", "", "?", ".", "!", " please", " thanks", " :)", " asap", " gracias", "..."]

LOREM = ("The validation campaign covered twelve prototypes across three climates. Braking "
         "distances were within tolerance except for two wet-surface runs where the ABS "
         "calibration showed oscillation. The team proposes an additional session to tune "
         "the controller gains and repeat the measurements with new tyres. Budget impact is "
         "limited because the track slots are already booked. ")


def _doc(rng: random.Random) -> str:
    stem = rng.choice(DOC_WORDS)
    if rng.random() < 0.5:
        stem += f"_{rng.randint(1, 2025)}"
    if rng.random() < 0.3:
        stem = stem.replace("_", " ").title().replace(" ", "")
    return stem + rng.choice(DOC_EXTS)


def _conversation(rng: random.Random) -> str:
    kind = rng.random()
    if kind < 0.14:
        return rng.choice(["hola", "hi", "hello there", "good morning AIDA", "buenos días, ¿qué tal?",
                           "hola, ¿qué puedes hacer?", "hey how are you", "thanks!", "ok perfect",
                           "great, that worked", "gracias por la ayuda", "yes", "no, that's wrong",
                           "can you help me?", "who are you", "what can you do for me"])
    if kind < 0.40:
        t = rng.choice(TOPICS)
        return rng.choice([
            f"what is {t}?", f"explain {t} in simple terms", f"can you tell me more about {t}",
            f"what's the difference between {t} and {rng.choice(TOPICS)}",
            f"give me three key facts about {t}", f"¿qué es {t}?", f"why does {t} matter for cars",
            f"write a short paragraph about {t}", f"is {t} relevant for electric vehicles?",
        ])
    if kind < 0.62:
        task = rng.choice(TASKS)
        return rng.choice([f"how do I {task}?", f"how can I {task} in python",
                           f"what is the fastest way to {task}", f"show me code to {task}",
                           f"¿cómo puedo {task}?", f"I get an error when I try to {task}, any idea?"])
    if kind < 0.80:
        text = LOREM * rng.choice([1, 1, 1, 2, 3, 6])
        return rng.choice([f"summarize this text: {text}", f"can you summarize the following: {text}",
                           f"resume este texto: {text}", f"tl;dr please: {text}",
                           f"make a summary of this paragraph in {rng.choice(LANGS)}: {text}"])
    if kind < 0.92:
        p = rng.choice(PHRASES)
        lang = rng.choice(LANGS)
        return rng.choice([f"how do you say '{p}' in {lang}?", f"what does '{p}' mean",
                           f"translate '{p}' to {lang}", f"'{p}' in {lang}?",
                           f"is '{p}' correct grammar?", f"¿cómo se dice '{p}' en {rng.choice(LANGS_ES)}?"])
    return rng.choice(["what is 17 times 23", "solve x^2 - 4 = 0", "write a haiku about winter tests",
                       "tell me a joke", "what day is it today", "compute the mean of 3, 7 and 12",
                       "draft an email to my manager about the delay"])


def _services(rng: random.Random) -> str:
    city, date = rng.choice(CITIES), rng.choice(DATES)
    n = rng.randint(1, 8)
    if rng.random() < 0.3:
        return rng.choice([
            f"which movies are playing at the cinema in {city} {date}",
            f"recommend tourist attractions to visit in {city}",
            f"what hotels are available in {city} {date}? book the cheapest",
            f"plan a sightseeing tour in {city} for {date}",
            f"is there a free table at {rng.choice(RESTAURANTS)} {date}",
        ])
    verb = rng.choice(["book", "reserve", "I need to book", "can you book", "please reserve",
                       "make a reservation for", "get me", "reservar", "reserva", "I want to book"])
    obj = rng.choice([f"a room at {rng.choice(HOTELS)}", "a hotel room", "a double room",
                      f"a table for {n} at {rng.choice(RESTAURANTS)}", f"a table for {n} people",
                      f"cinema tickets for {n}", f"a meeting room for {n} people",
                      "una habitación de hotel", f"una mesa para {n} personas", "a guided city tour"])
    where = rng.choice(["", f" in {city}", f" in {city}", " near the office", f" en {city}"])
    when = rng.choice([f" for {date}", f" {date}", f" from {date} for {n} nights", ""])
    return f"{verb} {obj}{where}{when}"


def _document_translation(rng: random.Random) -> str:
    doc, lang = _doc(rng), rng.choice(LANGS)
    return rng.choice([
        f"translate the document {doc} to {lang}",
        f"please translate {doc} into {lang}",
        f"I need {doc} translated to {lang}",
        f"could you translate the attached file {doc} to {lang}",
        f"traduce el documento {doc} al {rng.choice(LANGS_ES)}",
        f"translate {doc} from {rng.choice(LANGS)} to {lang}",
        f"can I get a {lang} version of the document {doc}",
        f"document translation: {doc} -> {lang}",
        f"translate the whole file {doc} into {lang}, keep the formatting",
        f"necesito traducir el archivo {doc} al {rng.choice(LANGS_ES)}",
    ])


def _noise(text: str, rng: random.Random) -> str:
    text = rng.choice(FILLERS) + text + rng.choice(TAILS)
    r = rng.random()
    if r < 0.08:
        text = text.upper()
    elif r < 0.3:
        text = text.capitalize()
    # occasional typo: swap two adjacent letters
    if rng.random() < 0.25 and len(text) > 4:
        i = rng.randrange(len(text) - 1)
        text = text[:i] + text[i + 1] + text[i] + text[i + 2:]
    return text


_FAMILIES = {
    IntentLabel.CONVERSATION: _conversation,
    IntentLabel.SERVICES: _services,
    IntentLabel.DOCUMENT_TRANSLATION: _document_translation,
}


def generate(label: IntentLabel, rng: random.Random) -> str:
    return _noise(_FAMILIES[label](rng), rng)
