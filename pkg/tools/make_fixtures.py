#!/usr/bin/env python3
"""Regenerate the bundled desk-scale fixtures deterministically.

Writes the default entity database and the chit-chat dialogue fixtures that
stand in for large-scale scraped data. Run from the repo root:

    python tools/make_fixtures.py
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "src" / "chitask" / "data"

PRICES = ["cheap", "moderate", "expensive"]
AREAS = ["north", "south", "east", "west", "centre"]
FOODS = ["chinese", "italian", "indian", "british", "french"]
TYPES = ["museum", "park", "cinema", "theatre", "college"]
DAYS = ["monday", "friday", "sunday"]
# disjoint origin/destination pools keep the from/to binding value-keyed
STATIONS_FROM = ["cambridge", "london", "norwich", "ely"]
STATIONS_TO = ["oxford", "leeds", "york", "bristol"]

# name pools are generated adjective x noun so the grids below always have
# enough distinct names
_HOTEL_ADJ = ["amber", "birch", "cedar", "dune", "ember", "fable", "grove", "harbor"]
_HOTEL_NOUN = ["lodge", "house", "inn", "villa", "manor"]
HOTEL_NAMES = [f"{a} {n}" for n in _HOTEL_NOUN for a in _HOTEL_ADJ]
_REST_ADJ = ["saffron", "golden", "river", "blue", "rose", "silver", "corner", "sunset"]
_REST_NOUN = ["table", "bowl", "kitchen", "bistro", "pavilion", "oven"]
RESTAURANT_NAMES = [f"{a} {n}" for n in _REST_NOUN for a in _REST_ADJ]
_ATTR_ADJ = ["willow", "regal", "globe", "castle", "orchid", "stone", "echo", "market"]
_ATTR_NOUN = ["museum", "gardens", "gallery", "grounds", "hall"]
ATTRACTION_NAMES = [f"{a} {n}" for n in _ATTR_NOUN for a in _ATTR_ADJ]


def phone(rng):
    return "0122" + "".join(str(rng.randrange(10)) for _ in range(7))


def postcode(rng):
    return "cb" + str(rng.randrange(1, 6)) + rng.choice("abcdefgh") + rng.choice("abcdefgh")


def address(rng):
    streets = ["mill road", "king street", "station road", "bridge lane", "park avenue",
               "queen walk", "chapel hill", "garden row"]
    return f"{rng.randrange(1, 90)} {rng.choice(streets)}"


def build_db(rng):
    # grid coverage: every constraint pair the dialogue templates can request
    # has at least one matching entity, so gold dialogues never hit db_0
    stars_cycle = ["2", "3", "4", "5"]
    hotels = []
    names = iter(HOTEL_NAMES)
    for i, (price, area) in enumerate((p, a) for p in PRICES for a in AREAS):
        hotels.append({
            "name": next(names), "price": price, "area": area,
            "stars": stars_cycle[i % 4],
            "type": "hotel" if i % 3 else "guesthouse",
            "phone": phone(rng), "address": address(rng), "postcode": postcode(rng),
        })
    for i, (area, stars) in enumerate((a, s) for a in AREAS for s in stars_cycle):
        if not any(h["area"] == area and h["stars"] == stars for h in hotels):
            hotels.append({
                "name": next(names), "price": PRICES[i % 3], "area": area,
                "stars": stars, "type": "hotel",
                "phone": phone(rng), "address": address(rng), "postcode": postcode(rng),
            })
    restaurants = []
    names = iter(RESTAURANT_NAMES)
    for i, (food, price) in enumerate((f, p) for f in FOODS for p in PRICES):
        restaurants.append({
            "name": next(names), "food": food, "price": price,
            "area": AREAS[i % 5],
            "phone": phone(rng), "address": address(rng), "postcode": postcode(rng),
        })
    for i, (price, area) in enumerate((p, a) for p in PRICES for a in AREAS):
        if not any(r["price"] == price and r["area"] == area for r in restaurants):
            restaurants.append({
                "name": next(names), "food": FOODS[i % 5], "price": price,
                "area": area,
                "phone": phone(rng), "address": address(rng), "postcode": postcode(rng),
            })
    for i, (area, food) in enumerate((a, f) for a in AREAS for f in FOODS):
        if not any(r["area"] == area and r["food"] == food for r in restaurants):
            restaurants.append({
                "name": next(names), "food": food, "price": PRICES[i % 3],
                "area": area,
                "phone": phone(rng), "address": address(rng), "postcode": postcode(rng),
            })
    attractions = []
    names = iter(ATTRACTION_NAMES)
    for typ, area in ((t, a) for t in TYPES for a in AREAS):
        attractions.append({
            "name": next(names), "type": typ, "area": area,
            "fee": rng.choice(["free", "2 pounds", "5 pounds", "8 pounds"]),
            "phone": phone(rng), "address": address(rng), "postcode": postcode(rng),
        })
    trains = []
    tid = 100
    for day in DAYS:
        for a in STATIONS_FROM:
            for b in STATIONS_TO:
                tid += rng.randrange(1, 9)
                trains.append({
                    "name": f"tr{tid:04d}",
                    "departure": a, "destination": b, "day": day,
                    "leave": f"{rng.randrange(6, 22):02d}:{rng.choice(['00', '15', '30', '45'])}",
                    "price": f"{rng.randrange(8, 40)} pounds",
                    "duration": f"{rng.randrange(35, 120)} minutes",
                })
    police = [{"name": "parkside station", "phone": phone(rng),
               "address": address(rng), "postcode": postcode(rng)}]
    hospital = [{"name": "addenbrookes", "department": "acute medicine", "phone": phone(rng),
                 "address": address(rng)}]
    return {
        "hotel": hotels, "restaurant": restaurants, "attraction": attractions,
        "train": trains, "police": police, "hospital": hospital,
    }


# Question/answer pool for chit-chat dialogues. Vocabulary intentionally avoids
# task-domain words so dialogue mode stays learnable at desk scale.
CHIT_PAIRS = [
    ("does money buy happiness ?", "depends on how much money you spend on it ."),
    ("what music do you enjoy ?", "mostly jazz and a little classical piano ."),
    ("have you seen any good films lately ?", "yes , the ocean documentary was wonderful ."),
    ("do you believe in luck ?", "luck favors the prepared mind ."),
    ("what is your favorite season ?", "autumn , the colors feel calming ."),
    ("coffee or tea in the morning ?", "tea first , coffee only on loud days ."),
    ("what did you dream about ?", "flying over a quiet silver ocean ."),
    ("is pineapple on pizza acceptable ?", "absolutely , sweetness belongs everywhere ."),
    ("how was your weekend ?", "lazy and full of pancakes ."),
    ("do you play any instruments ?", "a little guitar , badly but happily ."),
    ("what are you reading right now ?", "an old mystery novel about lighthouse keepers ."),
    ("cats or dogs ?", "cats on weekdays , dogs on holidays ."),
    ("what makes you laugh ?", "puns , the worse the better ."),
    ("do aliens exist somewhere ?", "statistics insists they must ."),
    ("what is the meaning of life ?", "good questions and better friends ."),
    ("how do you handle stress ?", "long walks and louder music ."),
    ("which superpower would you pick ?", "pausing time for extra naps ."),
    ("do you like rainy days ?", "yes , rain makes reading feel earned ."),
    ("which language would you learn ?", "italian , it sounds like singing ."),
    ("are mornings or evenings better ?", "evenings , mornings are a rumor ."),
    ("what hobby should i try ?", "pottery , mud is surprisingly forgiving ."),
    ("do you enjoy winter ?", "only the cocoa part of winter ."),
    ("what is your favorite color ?", "teal , it cannot decide and neither can i ."),
    ("any plans for tonight ?", "stargazing if the clouds cooperate ."),
    ("what snack is underrated ?", "frozen grapes , tiny honest miracles ."),
    ("do you like poetry ?", "yes , short poems with sharp endings ."),
    ("how do you feel today ?", "cheerful , like a sunny tuesday ."),
    ("what animal would you be ?", "an otter , professional floating sounds ideal ."),
    ("is time travel possible ?", "only forward , one second per second ."),
    ("do you sing in the shower ?", "loudly , the acoustics demand it ."),
    ("what made you smile today ?", "a dog wearing tiny boots ."),
    ("favorite board game ?", "chess , dignity in tiny wooden wars ."),
    ("do you trust robots ?", "more than elevators , less than dogs ."),
    ("what smell do you love ?", "old books and fresh bread ."),
    ("how big is the universe ?", "bigger than my weekend plans ."),
    ("do you keep a diary ?", "yes , mostly complaints about weather ."),
    ("what sport do you follow ?", "badminton , graceful panic with feathers ."),
    ("are ghosts real ?", "only the socks the dryer eats ."),
    ("what was your first job ?", "folding maps nobody wanted ."),
    ("do you like surprises ?", "planned surprises , ideally with cake ."),
    ("what city fascinates you ?", "venice , streets made of mirrors ."),
    ("is silence golden ?", "silver at least , gold after midnight ."),
]


def chit_dialogues(rng, count, pairs_per=(2, 3, 3, 4)):
    dialogues = []
    for _ in range(count):
        k = rng.choice(pairs_per)
        picked = rng.sample(CHIT_PAIRS, k)
        utterances = []
        for q, a in picked:
            utterances.append(q)
            utterances.append(a)
        dialogues.append(utterances)
    return dialogues


def write_chit(path, dialogues):
    with open(path, "w", encoding="utf-8") as fh:
        for i, d in enumerate(dialogues):
            if i:
                fh.write("\n")
            fh.write("\n".join(d) + "\n")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240811)
    with open(DATA / "entities.json", "w", encoding="utf-8") as fh:
        json.dump(build_db(rng), fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_chit(DATA / "chit_train.txt", chit_dialogues(random.Random(11), 160))
    write_chit(DATA / "chit_heldout.txt", chit_dialogues(random.Random(12), 60))
    print(f"fixtures written under {DATA}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
