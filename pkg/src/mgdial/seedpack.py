"""Bundled instruction content: seeds, paraphrase frames, user templates.

Fourteen parallel surface variants exist for every frame category, so
fourteen manuals can be compiled that state the same policies in
different words. Conditions deliberately mention attribute names and
domain words: that is the lexical signal matchers and taggers feed on.
"""
from __future__ import annotations

from .manuals import FrameSet, SeedInstruction, compile_manual, paraphrase_gate
from .model import ApiInput, ApiSpec, Manual

N_VARIANTS = 14

# searchable constraint attributes per domain
SEARCH_SINGLE: dict[str, tuple[str, ...]] = {
    "attraction": ("area", "type", "price"),
    "hospital": ("department",),
    "hotel": ("area", "price", "star", "type", "facility"),
    "restaurant": ("area", "food", "price"),
    "train": ("day", "leave", "arrive"),
}

SEARCH_PAIRS: dict[str, tuple[tuple[str, str], ...]] = {
    "attraction": (("area", "type"),),
    "hotel": (("area", "price"), ("price", "type"), ("area", "facility")),
    "restaurant": (("area", "food"),),
    "train": (("departure", "destination"),),
}

ANSWERABLE: dict[str, tuple[str, ...]] = {
    "attraction": ("address", "phone", "postcode", "price", "score"),
    "hospital": ("address", "phone", "postcode", "id"),
    "hotel": ("address", "phone", "postcode", "price", "score", "star", "type", "area", "facility"),
    "restaurant": ("address", "phone", "postcode", "price", "score", "food", "area"),
    "train": ("arrive", "leave", "price", "time", "class", "station"),
}

# ordered booking inputs; the entity handle comes first
BOOK_INPUTS: dict[str, tuple[str, ...]] = {
    "hotel": ("name", "day", "people", "stay"),
    "restaurant": ("name", "day", "people", "time"),
    "train": ("id", "people"),
}
TAXI_BOOK_INPUTS: dict[str, tuple[str, ...]] = {
    "leave": ("departure", "destination", "leave"),
    "arrive": ("departure", "destination", "arrive"),
}

CHANGE_ATTR: dict[str, str] = {
    "hotel": "day",
    "restaurant": "time",
    "train": "people",
    "taxi": "leave",
}

BOOKABLE = ("hotel", "restaurant", "train", "taxi")

_INPUT_PHRASES: dict[str, str] = {
    "name": "the name",
    "id": "the id",
    "day": "the day",
    "people": "the number of people",
    "stay": "the length of stay",
    "time": "the time",
    "departure": "the departure place",
    "destination": "the destination",
    "leave": "the leave time",
    "arrive": "the arrive time",
}


def _inputs_phrase(attrs: tuple[str, ...]) -> str:
    parts = [_INPUT_PHRASES[a] for a in attrs]
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def build_seeds() -> list[SeedInstruction]:
    seeds: list[SeedInstruction] = []
    for domain, attrs in SEARCH_SINGLE.items():
        api_name = f"{domain}_search"
        for attr in attrs:
            seeds.append(SeedInstruction(
                family=f"search-{attr}",
                domain=domain,
                category="search-single",
                slots={"domain": domain, "attr": attr, "api": api_name},
                api=ApiSpec(api_name, domain, "find", (ApiInput(attr),), ("choice", "name")),
            ))
    for domain, pairs in SEARCH_PAIRS.items():
        api_name = f"{domain}_search"
        for a1, a2 in pairs:
            seeds.append(SeedInstruction(
                family=f"search-{a1}-{a2}",
                domain=domain,
                category="search-pair",
                slots={"domain": domain, "attr1": a1, "attr2": a2, "api": api_name},
                api=ApiSpec(api_name, domain, "find", (ApiInput(a1), ApiInput(a2)), ("choice", "name")),
            ))
    for domain, attrs in ANSWERABLE.items():
        api_name = f"{domain}_search"
        handle = "id" if domain == "train" else "name"
        for attr in attrs:
            seeds.append(SeedInstruction(
                family=f"answer-{attr}",
                domain=domain,
                category="answer",
                slots={"domain": domain, "attr": attr, "api": api_name, "handle": handle},
                api=ApiSpec(api_name, domain, "find", (ApiInput(handle),), (attr,)),
            ))
    for domain, inputs in BOOK_INPUTS.items():
        api_name = f"{domain}_book"
        seeds.append(SeedInstruction(
            family="book",
            domain=domain,
            category="book",
            slots={"domain": domain, "api": api_name, "inputs": _inputs_phrase(inputs)},
            api=ApiSpec(api_name, domain, "add", tuple(ApiInput(a) for a in inputs), ("reference num.",)),
        ))
    for variant, inputs in TAXI_BOOK_INPUTS.items():
        seeds.append(SeedInstruction(
            family=f"book-{variant}",
            domain="taxi",
            category="book-taxi",
            slots={"domain": "taxi", "api": "taxi_book", "inputs": _inputs_phrase(inputs)},
            api=ApiSpec("taxi_book", "taxi", "add", tuple(ApiInput(a) for a in inputs),
                        ("car", "phone", "reference num.")),
        ))
    for domain in BOOKABLE:
        attr = CHANGE_ATTR[domain]
        seeds.append(SeedInstruction(
            family=f"change-{attr}",
            domain=domain,
            category="change",
            slots={"domain": domain, "attr": attr, "api": f"{domain}_change"},
            api=ApiSpec(f"{domain}_change", domain, "edit",
                        (ApiInput("reference num."), ApiInput(attr)), ("reference num.",)),
        ))
        seeds.append(SeedInstruction(
            family="cancel",
            domain=domain,
            category="cancel",
            slots={"domain": domain, "api": f"{domain}_cancel"},
            api=ApiSpec(f"{domain}_cancel", domain, "delete",
                        (ApiInput("reference num."),), ("reference num.",)),
        ))
    return seeds


# ---------------------------------------------------------------------------
# frames: 14 parallel paraphrases per category

FRAMES: dict[str, FrameSet] = {
    "search-single": FrameSet(
        category="search-single",
        condition=(
            "If the user specifies a {attr} they want for the {domain}, search by it.",
            "When a desired {attr} for a {domain} comes up, look it up.",
            "Whenever the caller names the {attr} of the {domain} they need, run a lookup.",
            "Should the guest mention which {attr} suits them for a {domain}, find matches.",
            "Once you learn the {attr} the user prefers for the {domain}, query the listings.",
            "Any time a {attr} preference for a {domain} is stated, check the records.",
            "On hearing the {attr} the visitor wants in a {domain}, retrieve options.",
            "As soon as the user tells you a {domain} {attr}, pull up candidates.",
            "In case the person asks for a {domain} with a particular {attr}, go search.",
            "Given a stated {attr} for the {domain}, fetch everything that fits.",
            "The moment someone picks a {attr} for their {domain}, scan the catalogue.",
            "Suppose the user has settled on a {attr} for the {domain}: look for entries.",
            "For callers who know the {attr} they want from a {domain}, run the finder.",
            "Where a {domain} {attr} requirement is voiced, consult the directory.",
        ),
        solution=(
            "Run {api} filtered on the {attr} and offer one of the results by name.",
            "Query {api} using that {attr}, then present a matching option.",
            "Trigger {api} with the {attr} filled in and recommend something from the list.",
            "Invoke {api}, passing the {attr}; mention how many fit and name one.",
            "Look it up through {api} by {attr} and suggest a specific result.",
            "Search via {api} on the given {attr}; tell the user a suitable entry.",
            "Fire {api} with the {attr} constraint and put forward one candidate.",
            "Use {api} keyed on the {attr}, reporting back a concrete choice.",
            "Call {api} with the {attr} value to get candidates, then propose one.",
            "Filter through {api} by the stated {attr} and share a pick.",
            "Ask {api} for entries matching the {attr}; float one suggestion.",
            "Pull candidates from {api} constrained by {attr} and highlight a result.",
            "Let {api} narrow things down by {attr}, then name an option.",
            "Have {api} fetch places with that {attr} and single one out.",
        ),
        api_description=(
            "{api} finds entries; its {attr} argument filters by {attr}.",
            "The {api} call accepts a {attr} and returns matching records.",
            "{api} takes one input, the {attr}, and lists everything that fits.",
            "Pass the {attr} to {api} to retrieve fitting entries.",
            "{api} expects the {attr} as input and responds with candidates.",
            "Supplying a {attr} to {api} yields the records that match it.",
            "The input of {api} is the desired {attr}; the output is the matching set.",
            "{api} searches the catalogue; give it the {attr} to narrow results.",
            "Feed the {attr} into {api} and it hands back suitable entries.",
            "{api} has a single parameter here, the {attr} being asked for.",
            "Provide {api} with the {attr}; it replies with every fitting entry.",
            "{api} queries by {attr} and produces the list of matches.",
            "One argument goes into {api}: the {attr}. Matches come out.",
            "To search, hand the {attr} over to {api} and read the results.",
        ),
        reply=(
            "I can see {choice} matching option(s). {name} stands out.",
            "Search done: {choice} result(s). Take a look at {name}.",
            "We have {choice} candidate(s) on file. {name} could suit you.",
            "That narrows it to {choice}. My pick would be {name}.",
            "Found {choice} in total. {name} comes well rated.",
            "There's a shortlist of {choice} now. {name} is worth considering.",
            "{choice} place(s) match so far. Perhaps try {name}.",
            "Your criteria leave {choice} on the list. {name} is one of them.",
            "Okay, {choice} match(es) found. How does {name} sound?",
            "The search returns {choice}. Among them, {name} is popular.",
            "Right now I count {choice} that fit. {name} might be ideal.",
            "After filtering, the count is {choice}. Consider {name}.",
            "Noted. {choice} option(s) in the system. {name} catches the eye.",
            "All right, the list holds {choice} item(s). {name} may be the one.",
        ),
    ),
    "search-pair": FrameSet(
        category="search-pair",
        condition=(
            "If the user gives both a {attr1} and a {attr2} for the {domain}, search with the two together.",
            "When the {attr1} plus the {attr2} of a {domain} are mentioned, look them up jointly.",
            "Whenever a caller states the {attr1} along with the {attr2} they want, run a combined lookup.",
            "Should someone specify {attr1} and {attr2} for their {domain}, find entries meeting both.",
            "Once the user has named a {attr1} as well as a {attr2}, query using the pair.",
            "Any time {attr1} and {attr2} preferences arrive for a {domain}, check records on both.",
            "On hearing which {attr1} and which {attr2} the visitor needs, retrieve joint matches.",
            "As soon as a {domain} {attr1} and {attr2} are both known, pull up what satisfies them.",
            "In case the person wants a {domain} by {attr1} and also by {attr2}, search accordingly.",
            "Given a {attr1} together with a {attr2}, fetch the entries that fit the two.",
            "The moment both the {attr1} and the {attr2} are picked, scan for places meeting each.",
            "Suppose {attr1} and {attr2} have both been settled for the {domain}: look for entries.",
            "For callers providing a {attr1} and a {attr2} at once, run the finder over both.",
            "Where a {attr1} requirement and a {attr2} requirement are voiced, consult the directory.",
        ),
        solution=(
            "Run {api} filtered on the {attr1} and the {attr2} and offer a result by name.",
            "Query {api} with both the {attr1} and the {attr2}, then present an option.",
            "Trigger {api} carrying the {attr1} plus the {attr2} and recommend one hit.",
            "Invoke {api} with the two values; mention how many fit and name one.",
            "Look it up through {api} by {attr1} and {attr2} and suggest a result.",
            "Search via {api} on the given pair; tell the user a suitable entry.",
            "Fire {api} with both constraints and put forward one candidate.",
            "Use {api} keyed on {attr1} and {attr2}, reporting back a concrete choice.",
            "Call {api} with the pair of values to get candidates, then propose one.",
            "Filter through {api} by the stated {attr1} and {attr2} and share a pick.",
            "Ask {api} for entries matching both; float one suggestion.",
            "Pull candidates from {api} constrained by the two attributes and highlight one.",
            "Let {api} narrow things down by the pair, then name an option.",
            "Have {api} fetch places meeting both and single one out.",
        ),
        api_description=(
            "{api} finds entries; give it the {attr1} and the {attr2} to filter on both.",
            "The {api} call accepts a {attr1} and a {attr2} and returns matching records.",
            "{api} takes two inputs, the {attr1} then the {attr2}, and lists what fits.",
            "Pass the {attr1} and the {attr2} to {api} to retrieve fitting entries.",
            "{api} expects the {attr1} and {attr2} as inputs and responds with candidates.",
            "Supplying a {attr1} plus a {attr2} to {api} yields the records matching both.",
            "The inputs of {api} are the {attr1} and the {attr2}; out comes the matching set.",
            "{api} searches the catalogue; hand it the {attr1} and the {attr2} to narrow results.",
            "Feed the {attr1} and the {attr2} into {api} and it hands back suitable entries.",
            "{api} has two parameters here: first the {attr1}, second the {attr2}.",
            "Provide {api} with both values; it replies with every fitting entry.",
            "{api} queries on {attr1} and {attr2} and produces the list of matches.",
            "Two arguments go into {api}: the {attr1} and the {attr2}. Matches come out.",
            "To search, hand the {attr1} and the {attr2} over to {api} and read the results.",
        ),
        reply=(
            "I can see {choice} matching option(s). {name} stands out.",
            "Search done: {choice} result(s). Take a look at {name}.",
            "We have {choice} candidate(s) on file. {name} could suit you.",
            "That narrows it to {choice}. My pick would be {name}.",
            "Found {choice} in total. {name} comes well rated.",
            "There's a shortlist of {choice} now. {name} is worth considering.",
            "{choice} place(s) match so far. Perhaps try {name}.",
            "Your criteria leave {choice} on the list. {name} is one of them.",
            "Okay, {choice} match(es) found. How does {name} sound?",
            "The search returns {choice}. Among them, {name} is popular.",
            "Right now I count {choice} that fit. {name} might be ideal.",
            "After filtering, the count is {choice}. Consider {name}.",
            "Noted. {choice} option(s) in the system. {name} catches the eye.",
            "All right, the list holds {choice} item(s). {name} may be the one.",
        ),
    ),
    "answer": FrameSet(
        category="answer",
        condition=(
            "If the user asks for the {attr} of a {domain}, look the place up and tell them.",
            "When someone wants to know a {domain}'s {attr}, fetch it and report back.",
            "Whenever the caller requests the {attr}, retrieve the record and answer.",
            "Should the guest inquire about the {attr} of the chosen {domain}, provide it.",
            "Once the user asks what the {attr} is, pull the entry and share that detail.",
            "Any time a question about the {attr} comes in, get the record and reply.",
            "On being asked for the {attr} of the {domain} under discussion, supply it.",
            "As soon as the visitor wants the {attr}, look up the entry and pass it on.",
            "In case the person needs the {attr} of that {domain}, find it and say so.",
            "Given a request for the {attr}, consult the listing and respond with it.",
            "The moment someone queries the {attr}, check the catalogue and quote it.",
            "Suppose the user wonders about the {attr} of the {domain}: retrieve and tell.",
            "For callers asking after the {attr}, bring up the record and read it out.",
            "Where the {attr} of the discussed {domain} is requested, deliver the value.",
        ),
        solution=(
            "Call {api} with the {handle} of the place in question and read its {attr} back.",
            "Query {api} by {handle}, then state the {attr} from the returned record.",
            "Trigger {api} on that {handle} and quote the {attr} field to the user.",
            "Invoke {api} with the {handle}; answer using the {attr} it returns.",
            "Look the entry up through {api} via its {handle} and give the {attr}.",
            "Search {api} for the {handle} and relay the {attr} in your reply.",
            "Fire {api} keyed on the {handle}, then surface the {attr} value.",
            "Use {api} with the {handle} to load the record and mention its {attr}.",
            "Call {api} on the {handle} in focus and report the {attr} found.",
            "Filter {api} by the {handle}; the {attr} in the result is your answer.",
            "Ask {api} about that {handle} and forward the {attr} it holds.",
            "Pull the record from {api} with the {handle} and cite the {attr}.",
            "Let {api} resolve the {handle}, then communicate the {attr}.",
            "Have {api} fetch the entry by {handle} and pass along the {attr}.",
        ),
        api_description=(
            "{api} looks a place up; give it the {handle} and read the {attr} off the result.",
            "The {api} call accepts a {handle} and the returned record carries the {attr}.",
            "{api} takes one input, the {handle}, and its output includes the {attr}.",
            "Pass the {handle} to {api}; the {attr} comes back in the entry.",
            "{api} expects the {handle} as input; the matching record holds the {attr}.",
            "Supplying a {handle} to {api} yields the full record, {attr} included.",
            "The input of {api} is the {handle}; among the outputs is the {attr}.",
            "{api} fetches a single record by {handle}, exposing fields like the {attr}.",
            "Feed the {handle} into {api} and pick the {attr} out of the response.",
            "{api} has one parameter, the {handle}; the result lists the {attr}.",
            "Provide {api} with the {handle}; it responds with the record and its {attr}.",
            "{api} resolves a {handle} to a record from which the {attr} can be read.",
            "One argument goes into {api}: the {handle}. The {attr} is in what returns.",
            "To answer, hand the {handle} to {api} and take the {attr} from the output.",
        ),
        reply=(
            "The {attr} of {name} is {{attr}}.",
            "{name} lists its {attr} as {{attr}}.",
            "For {name}, the {attr} reads {{attr}}.",
            "Sure: the {attr} of {name} is {{attr}}.",
            "That would be {{attr}} for the {attr} of {name}.",
            "Our records give the {attr} of {name} as {{attr}}.",
            "Happy to help: the {attr} for {name} is {{attr}}.",
            "{name} has {{attr}} down for its {attr}.",
            "Checking... the {attr} comes up as {{attr}} for {name}.",
            "Here you go: {{attr}} is the {attr} on file for {name}.",
            "The record shows {{attr}} under {attr} for {name}.",
            "As for the {attr}, {name} shows {{attr}}.",
            "You'll find the {attr} of {name} to be {{attr}}.",
            "Certainly, {{attr}} is what we have for the {attr} of {name}.",
        ),
    ),
    "book": FrameSet(
        category="book",
        condition=(
            "If the user wants to reserve the {domain}, collect {inputs} and book it.",
            "When a booking for the {domain} is requested, gather {inputs} and place it.",
            "Whenever the caller decides to book, obtain {inputs} before confirming.",
            "Should the guest ask you to reserve, make sure you have {inputs}, then proceed.",
            "Once the user commits to the {domain}, take down {inputs} and complete the booking.",
            "Any time a reservation is wanted, secure {inputs} and then finalize.",
            "On a request to book the {domain}, collect {inputs} and carry it out.",
            "As soon as booking intent is clear, ask for {inputs} and submit the reservation.",
            "In case the person wishes to reserve, note {inputs} and make the booking.",
            "Given the go-ahead to book, assemble {inputs} and lock it in.",
            "The moment the user says to book it, record {inputs} and confirm.",
            "Suppose a reservation is requested: first get {inputs}, then book.",
            "For callers ready to reserve the {domain}, capture {inputs} and process it.",
            "Where the user asks for a reservation, line up {inputs} and put it through.",
        ),
        solution=(
            "Call {api} with {inputs}; give the user the reference number afterwards.",
            "Submit the reservation through {api} using {inputs} and share the reference number.",
            "Trigger {api} once {inputs} are known and pass the reference number on.",
            "Invoke {api} with every detail; quote the reference number to the user.",
            "Place the booking via {api} and read the reference number back.",
            "Send {inputs} into {api}, then confirm with the reference number.",
            "Fire {api} carrying {inputs} and report the reference number issued.",
            "Use {api} to register the booking and tell the user its reference number.",
            "Call {api} when the details are complete; the reply is the reference number.",
            "Book through {api} with {inputs} and announce the reference number.",
            "Hand {inputs} to {api}; afterwards state the reference number.",
            "Push the reservation into {api} and surface the reference number.",
            "Let {api} take {inputs} and then provide the reference number.",
            "Have {api} record it all and finish by giving the reference number.",
        ),
        api_description=(
            "{api} creates a booking from {inputs} and returns a reference number.",
            "The {api} call takes {inputs}; a reference number comes back.",
            "{api} needs {inputs} to register a reservation, yielding a reference number.",
            "Pass {inputs} to {api}; the confirmation holds a reference number.",
            "{api} expects {inputs} and answers with a reference number.",
            "Supplying {inputs} to {api} books the spot and issues a reference number.",
            "The inputs of {api} are {inputs}; its output is the reference number.",
            "{api} writes the reservation; hand it {inputs} and keep the reference number.",
            "Feed {inputs} into {api} and a reference number is produced.",
            "{api} takes {inputs} in that order and responds with a reference number.",
            "Provide {api} with {inputs}; it replies with the booking's reference number.",
            "{api} turns {inputs} into a confirmed booking plus reference number.",
            "The arguments for {api} are {inputs}. Out comes a reference number.",
            "To book, give {inputs} to {api} and note the reference number returned.",
        ),
        reply=(
            "You're all set. The reference number is {reference num.}.",
            "Booked! Quote reference number {reference num.} if you need it.",
            "Done, your reservation is in. Reference number: {reference num.}.",
            "That's confirmed. Keep the reference number {reference num.} handy.",
            "All arranged! Your reference number reads {reference num.}.",
            "Reservation placed. The reference number is {reference num.}.",
            "Success! Booking confirmed under reference number {reference num.}.",
            "It's booked. Your reference number will be {reference num.}.",
            "Consider it done. Reference number {reference num.} is yours.",
            "The booking went through. Reference number: {reference num.}.",
            "Confirmed! Please note the reference number {reference num.}.",
            "Your spot is secured, reference number {reference num.}.",
            "Great, the reservation stands. Reference number {reference num.}.",
            "Everything is in place. The reference number is {reference num.}.",
        ),
    ),
    "book-taxi": FrameSet(
        category="book-taxi",
        condition=(
            "If the user needs a taxi, collect {inputs} and order the ride.",
            "When a taxi is requested, gather {inputs} and arrange it.",
            "Whenever the caller wants a ride, obtain {inputs} before dispatching.",
            "Should the guest ask for a cab, make sure you have {inputs}, then proceed.",
            "Once a taxi is wanted, take down {inputs} and set up the ride.",
            "Any time a cab is needed, secure {inputs} and then dispatch.",
            "On a request for a taxi, collect {inputs} and book the car.",
            "As soon as ride intent is clear, ask for {inputs} and order the taxi.",
            "In case the person needs transport, note {inputs} and arrange a cab.",
            "Given a taxi request, assemble {inputs} and lock the ride in.",
            "The moment the user asks for a car, record {inputs} and confirm the cab.",
            "Suppose a ride is requested: first get {inputs}, then dispatch.",
            "For callers wanting a taxi, capture {inputs} and process the order.",
            "Where transport is asked for, line up {inputs} and send a car.",
        ),
        solution=(
            "Call {api} with {inputs}; relay the car, its phone and the reference number.",
            "Order the ride through {api} and share the car, phone and reference number.",
            "Trigger {api} once {inputs} are known; pass on the car, phone and reference number.",
            "Invoke {api}; tell the user the car type, contact phone and reference number.",
            "Dispatch via {api} and read back the car, the phone and the reference number.",
            "Send {inputs} into {api}, then confirm the car with phone and reference number.",
            "Fire {api} carrying {inputs} and report car, phone and reference number.",
            "Use {api} to order the cab; give the car details, phone and reference number.",
            "Call {api} when details are complete and quote car, phone and reference number.",
            "Book the ride with {api} and announce the car, its phone and reference number.",
            "Hand {inputs} to {api}; state the assigned car, phone and reference number.",
            "Push the order into {api} and surface the car, phone and reference number.",
            "Let {api} take {inputs}; then provide the car, phone and reference number.",
            "Have {api} arrange it and finish with the car, phone and reference number.",
        ),
        api_description=(
            "{api} orders a ride from {inputs}, assigning a car, a phone and a reference number.",
            "The {api} call takes {inputs}; a car, phone and reference number come back.",
            "{api} needs {inputs} to dispatch, yielding the car, its phone and a reference number.",
            "Pass {inputs} to {api}; the reply names the car, the phone and a reference number.",
            "{api} expects {inputs} and answers with a car, a contact phone and a reference number.",
            "Supplying {inputs} to {api} books the cab: car, phone and reference number issued.",
            "The inputs of {api} are {inputs}; outputs are the car, phone and reference number.",
            "{api} arranges the ride; hand it {inputs} and note car, phone and reference number.",
            "Feed {inputs} into {api}; an assigned car, phone and reference number are produced.",
            "{api} takes {inputs} in that order and responds with car, phone and reference number.",
            "Provide {api} with {inputs}; it replies with the car, its phone and reference number.",
            "{api} turns {inputs} into a dispatched cab with car, phone and reference number.",
            "The arguments for {api} are {inputs}. Out come the car, phone and reference number.",
            "To order, give {inputs} to {api} and collect car, phone and reference number.",
        ),
        reply=(
            "Your taxi is booked: a {car} will come, phone {phone}, reference number {reference num.}.",
            "Ride arranged! Look out for a {car}. Contact: {phone}. Reference number {reference num.}.",
            "Done. A {car} will pick you up; call {phone} if needed. Reference number: {reference num.}.",
            "Cab confirmed: {car}, reachable at {phone}, under reference number {reference num.}.",
            "All set, the car is a {car}, phone {phone}, reference number {reference num.}.",
            "Dispatched! Expect a {car}. The driver's phone is {phone}, reference number {reference num.}.",
            "Your ride: a {car}. Phone {phone}. Keep reference number {reference num.}.",
            "Booked a {car} for you, contact number {phone}, reference number {reference num.}.",
            "The taxi is on it's way: {car}, phone {phone}, reference number {reference num.}.",
            "Car ordered. It's a {car}; phone {phone}; reference number {reference num.}.",
            "Confirmed: a {car} will arrive. Call {phone} to reach it. Reference number {reference num.}.",
            "Taxi secured, a {car}. Driver phone: {phone}. Reference number: {reference num.}.",
            "A {car} is assigned, phone {phone}, filed under reference number {reference num.}.",
            "Ride booked. Vehicle: {car}. Phone: {phone}. Reference number {reference num.}.",
        ),
    ),
    "change": FrameSet(
        category="change",
        condition=(
            "If the user wants a different {attr} on an existing {domain} booking, update it.",
            "When a change of {attr} is requested for a {domain} reservation, amend it.",
            "Whenever the caller asks to move the {attr} of their booking, adjust it.",
            "Should the guest need the {attr} on the reservation altered, do so.",
            "Once the user asks to switch the booking's {attr}, make the edit.",
            "Any time an update to a booked {attr} comes in, apply it.",
            "On a request to revise the {attr} of the {domain} booking, amend the record.",
            "As soon as the visitor wants another {attr} for the reservation, update it.",
            "In case the person asks to modify the booked {attr}, carry that out.",
            "Given a new {attr} for an existing booking, change the reservation.",
            "The moment someone wants the {attr} moved, edit the booking.",
            "Suppose the user needs the reservation's {attr} changed: process it.",
            "For callers revising the {attr} on their booking, push the update.",
            "Where an altered {attr} is wanted on the {domain} booking, apply the change.",
        ),
        solution=(
            "Call {api} with the reference number and the new {attr}, then confirm.",
            "Update through {api} using the reference number plus the fresh {attr}.",
            "Trigger {api} with the reference number and replacement {attr}; confirm after.",
            "Invoke {api}, passing the reference number and the changed {attr}.",
            "Amend via {api} with the reference number and the new {attr} value.",
            "Send the reference number and the updated {attr} into {api}, then confirm.",
            "Fire {api} carrying the reference number and new {attr}; report success.",
            "Use {api} with the reference number and revised {attr} to edit the booking.",
            "Call {api} quoting the reference number and the new {attr}; acknowledge it.",
            "Push the edit into {api}: reference number first, new {attr} second.",
            "Hand {api} the reference number with the new {attr} and confirm the change.",
            "Let {api} apply the new {attr} against the reference number.",
            "Have {api} rewrite the booking's {attr} using its reference number.",
            "Run {api} on the reference number with the new {attr} and confirm back.",
        ),
        api_description=(
            "{api} edits a booking; it takes the reference number and the new {attr}.",
            "The {api} call accepts a reference number plus a {attr} and updates the record.",
            "{api} takes two inputs, the reference number then the {attr} to set.",
            "Pass the reference number and the new {attr} to {api} to amend the booking.",
            "{api} expects the reference number and a {attr}; it updates the reservation.",
            "Supplying a reference number and a {attr} to {api} rewrites that field.",
            "The inputs of {api} are the reference number and the {attr}; it confirms the edit.",
            "{api} modifies bookings; give it the reference number and the fresh {attr}.",
            "Feed the reference number and replacement {attr} into {api} to change it.",
            "{api} has two parameters: the reference number and the new {attr}.",
            "Provide {api} with the reference number and the {attr}; it applies the update.",
            "{api} updates the stored {attr} for the booking with that reference number.",
            "Two arguments go into {api}: the reference number and the {attr}. It edits.",
            "To amend, hand the reference number and the new {attr} to {api}.",
        ),
        reply=(
            "Updated: the {attr} is now {{attr}} on booking {reference num.}.",
            "Change applied. Booking {reference num.} carries the {attr} {{attr}}.",
            "Done, I moved the {attr} to {{attr}} for reference number {reference num.}.",
            "Your booking {reference num.} now shows {{attr}} as the {attr}.",
            "All amended: {attr} set to {{attr}} under {reference num.}.",
            "The reservation {reference num.} has been updated to {attr} {{attr}}.",
            "Edit complete. {attr}: {{attr}}. Reference number {reference num.}.",
            "That's changed, booking {reference num.} lists the {attr} as {{attr}}.",
            "Consider it moved: {attr} {{attr}} on reference number {reference num.}.",
            "The update went through. {reference num.} now has {attr} {{attr}}.",
            "Revised! Your {attr} reads {{attr}} for booking {reference num.}.",
            "Adjustment saved: {attr} {{attr}} against reference number {reference num.}.",
            "Booking {reference num.} updated, the new {attr} is {{attr}}.",
            "Done and dusted: {attr} now {{attr}} on {reference num.}.",
        ),
    ),
    "cancel": FrameSet(
        category="cancel",
        condition=(
            "If the user wants to cancel their {domain} booking, remove it.",
            "When a cancellation of the {domain} reservation is requested, drop it.",
            "Whenever the caller asks to call off the booking, cancel it.",
            "Should the guest no longer want the reservation, delete the booking.",
            "Once the user asks to scrap the {domain} booking, remove the record.",
            "Any time a cancellation request arrives, void the reservation.",
            "On a request to cancel the {domain} booking, take it off the books.",
            "As soon as the visitor withdraws, cancel their reservation.",
            "In case the person decides against the booking, annul it.",
            "Given a wish to cancel, remove the {domain} reservation.",
            "The moment someone calls the booking off, delete it.",
            "Suppose the user backs out of the {domain} booking: cancel it.",
            "For callers dropping their reservation, process the cancellation.",
            "Where the {domain} booking is no longer wanted, strike it.",
        ),
        solution=(
            "Call {api} with the reference number and confirm the cancellation.",
            "Cancel through {api} using the reference number, then confirm.",
            "Trigger {api} on the reference number; tell the user it is off.",
            "Invoke {api}, passing the reference number, and acknowledge.",
            "Remove it via {api} with the reference number and confirm back.",
            "Send the reference number into {api}, then report the cancellation.",
            "Fire {api} carrying the reference number; state that it's cancelled.",
            "Use {api} with the reference number to void the booking.",
            "Call {api} quoting the reference number and confirm it is gone.",
            "Push the cancellation into {api} with the reference number.",
            "Hand {api} the reference number and let the user know it's done.",
            "Let {api} drop the booking by its reference number.",
            "Have {api} delete the reservation under that reference number.",
            "Run {api} on the reference number and confirm the removal.",
        ),
        api_description=(
            "{api} cancels a booking; its only input is the reference number.",
            "The {api} call accepts a reference number and removes that booking.",
            "{api} takes one input, the reference number, and deletes the record.",
            "Pass the reference number to {api} to void the reservation.",
            "{api} expects the reference number; the booking is then removed.",
            "Supplying a reference number to {api} cancels the matching booking.",
            "The input of {api} is the reference number; the booking gets dropped.",
            "{api} deletes bookings; give it the reference number to act on.",
            "Feed the reference number into {api} and the reservation is gone.",
            "{api} has a single parameter, the reference number to cancel.",
            "Provide {api} with the reference number; it annuls the booking.",
            "{api} strikes the booking stored under that reference number.",
            "One argument goes into {api}: the reference number. It cancels.",
            "To cancel, hand the reference number to {api}.",
        ),
        reply=(
            "Cancelled. Booking {reference num.} is no more.",
            "Done, reservation {reference num.} has been called off.",
            "The booking under {reference num.} is now cancelled.",
            "All clear: {reference num.} was removed from the books.",
            "That reservation ({reference num.}) is officially off.",
            "Your booking {reference num.} has been voided.",
            "Struck it: {reference num.} no longer stands.",
            "Reference number {reference num.} is cancelled as requested.",
            "Okay, I dropped the booking {reference num.}.",
            "The cancellation for {reference num.} went through.",
            "Booking {reference num.}: cancelled and confirmed.",
            "It's gone. {reference num.} won't be charged.",
            "Removed the reservation {reference num.} for you.",
            "Consider {reference num.} cancelled.",
        ),
    ),
}


# ---------------------------------------------------------------------------
# user-side surface templates (consumed by the simulator)

USER_TEMPLATES: dict[str, tuple[str, ...]] = {
    "greet": (
        "Hi there!",
        "Hello, I could use some help.",
        "Good day to you.",
        "Hey, quick question for you.",
        "Hi, hoping you can help me plan something.",
        "Hello there, are you free to help?",
        "Morning! I need a hand.",
        "Hiya.",
    ),
    "farewell": (
        "That's everything, thanks!",
        "Great, that's all I needed. Bye!",
        "Thanks so much, goodbye.",
        "Perfect, thank you. Take care!",
        "All sorted then, cheers.",
        "Thanks for the help, bye bye.",
        "Wonderful, nothing else. Goodbye!",
        "That covers it, thank you!",
    ),
    "inform-single": (
        "I'm looking for a {domain} with {attr} {value}.",
        "I need a {domain}, the {attr} should be {value}.",
        "Can you find me a {domain} whose {attr} is {value}?",
        "A {domain} with the {attr} {value} would be great.",
        "Please search for a {domain}, {attr} {value}.",
        "Do you have a {domain} where the {attr} is {value}?",
        "I want the {attr} to be {value} for the {domain}.",
        "Something like a {domain} with {attr} {value}, please.",
        "Find a {domain} by {attr}: {value}.",
        "How about a {domain}? The {attr} I want is {value}.",
    ),
    "inform-pair": (
        "I'm after a {domain} with {attr1} {value1} and {attr2} {value2}.",
        "I need a {domain}: {attr1} {value1}, {attr2} {value2}.",
        "Can you find a {domain} whose {attr1} is {value1} and {attr2} is {value2}?",
        "Looking for a {domain}, the {attr1} should be {value1} and the {attr2} {value2}.",
        "Please search {domain}s with {attr1} {value1} plus {attr2} {value2}.",
        "A {domain} where the {attr1} is {value1} and the {attr2} is {value2}, please.",
        "I want {attr1} {value1} and {attr2} {value2} for the {domain}.",
        "Got anything with {attr1} {value1} and {attr2} {value2}?",
    ),
    "inform-cross": (
        "I need a {domain1} with {attr1} {value1}, and also a {domain2} with {attr2} {value2}.",
        "Two things: a {domain1} whose {attr1} is {value1}, and a {domain2} with {attr2} {value2}.",
        "Can you look up a {domain1} with {attr1} {value1}? I'll also want a {domain2}, {attr2} {value2}.",
        "While you're at it, find a {domain1} with {attr1} {value1} plus a {domain2} where {attr2} is {value2}.",
        "A {domain1} with {attr1} {value1}, please, and then a {domain2} with {attr2} {value2}.",
        "I'm planning around a {domain1} ({attr1} {value1}) and a {domain2} ({attr2} {value2}).",
    ),
    "request": (
        "What is the {attr} of {name}?",
        "Could you tell me its {attr}?",
        "And the {attr}, please?",
        "Do you know the {attr} of {name}?",
        "What's their {attr}?",
        "Can I get the {attr} for {name}?",
        "I'd also like to know the {attr}.",
        "Please share the {attr} of {name}.",
    ),
    "book": (
        "Please book it for {values}.",
        "Can you reserve that for {values}?",
        "I'd like to book, {values}.",
        "Go ahead and book it: {values}.",
        "Reserve it for {values}, please.",
        "Let's book that for {values}.",
        "Make a booking for {values}.",
        "Yes, book for {values}.",
    ),
    "book-more": (
        "Make it {values}.",
        "For {values}, please.",
        "It should be {values}.",
        "Let's say {values}.",
        "{values}, if that works.",
        "Put down {values}.",
    ),
    "book-taxi": (
        "I need a taxi from {departure} to {destination}.",
        "Can you get me a cab going from {departure} to {destination}?",
        "Please order a taxi, departure {departure}, destination {destination}.",
        "I'd like a ride from {departure} over to {destination}.",
        "Book me a taxi between {departure} and {destination}.",
        "A cab from {departure} to {destination}, please.",
        "Could you arrange a taxi? From {departure}, heading to {destination}.",
        "Taxi from {departure} to {destination} when possible.",
    ),
    "taxi-time-leave": (
        "I want to leave at {value}.",
        "The leave time should be {value}.",
        "Departing at {value}.",
        "Make the pickup for {value}.",
        "Leave at {value}, please.",
        "Let's set the leave time to {value}.",
    ),
    "taxi-time-arrive": (
        "I need to arrive by {value}.",
        "The arrive time should be {value}.",
        "Arriving by {value} would be ideal.",
        "Please make sure it arrives by {value}.",
        "Arrive by {value}, please.",
        "Set the arrive time to {value}.",
    ),
    "change": (
        "I need to change the {attr} of my {domain} booking to {value}.",
        "Can you move the {attr} on that booking to {value}?",
        "Please update the booking's {attr} to {value}.",
        "Actually, switch the {attr} to {value}.",
        "Could the {attr} be changed to {value}?",
        "Change the {attr} on my reservation to {value}, please.",
        "I'd like the {attr} to be {value} instead.",
        "Update my {domain} booking, {attr} {value}.",
    ),
    "cancel": (
        "Please cancel my {domain} booking.",
        "I need to cancel that {domain} reservation.",
        "Can you call off the {domain} booking?",
        "Cancel the {domain} reservation, please.",
        "Actually, drop my {domain} booking.",
        "I won't need the {domain} anymore, cancel it.",
        "Scrap the {domain} booking for me.",
        "Let's cancel the {domain} reservation.",
    ),
}

# agent prompts for missing booking details, keyed by attribute
ASK_TEMPLATES: dict[str, tuple[str, ...]] = {
    "day": ("For which day?", "What day should I book?", "Which day would you like?"),
    "people": ("For how many people?", "How many people will it be?", "What size is your party?"),
    "stay": ("How many nights will you stay?", "For how long a stay?", "How many nights shall I book?"),
    "time": ("At what time?", "What time would you like?", "For what time shall I book?"),
    "leave": ("When would you like to leave?", "What leave time suits you?", "When should it pick you up?"),
    "arrive": ("By when should you arrive?", "What arrive time do you need?", "When do you need to be there?"),
    "name": ("Which one should I book?", "What's the name of the place?", "Which place would you like?"),
    "id": ("Which train id should I book?", "What's the train id?", "Which service, by id?"),
    "departure": ("Where from?", "What's the departure point?", "Where should it pick you up?"),
    "destination": ("Where to?", "What's the destination?", "Where are you headed?"),
    "reference num.": ("What's the reference number?", "Could you give me the reference number?",
                       "Which reference number is it under?"),
}

NO_RESULT_REPLIES: tuple[str, ...] = (
    "Sorry, nothing in our records matches that.",
    "I'm afraid no entry fits those requirements.",
    "No matches came back for that, unfortunately.",
    "Hmm, the search found nothing suitable.",
)


def build_manual(manual_id: str, set_id: int) -> Manual:
    return compile_manual(manual_id, set_id, build_seeds(), FRAMES)


def build_manual_pack(count: int = N_VARIANTS) -> list[Manual]:
    if not (1 <= count <= N_VARIANTS):
        raise ValueError(f"count must be in 1..{N_VARIANTS}")
    return [build_manual(f"m{k:02d}", k) for k in range(count)]


def gate_report(threshold: float = 0.8):
    return paraphrase_gate(FRAMES, threshold=threshold)
