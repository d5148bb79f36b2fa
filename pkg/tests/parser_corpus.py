"""Hand-labelled agent responses: (text, expected status, expected (c1, c2) or None)."""

OK, NONE, BAD = "ok", "no_final_answer", "malformed_numbers"

CORPUS = [
    # plain, comma grouped
    ("Final Answer: I will choose to consume 725,677 units during my working period and "
     "800,013 units during my retirement period because I want balance.", OK, (725677, 800013)),
    # decimals
    ("Final Answer: I will choose to consume 725,677.19 units during my working period and "
     "800,013.17 units during my retirement period because of smoothing.", OK, (725677.19, 800013.17)),
    # no grouping
    ("Final Answer: I will choose to consume 700000 units in the working period and 850000 units "
     "in retirement because saving pays.", OK, (700000, 850000)),
    # lowercase marker, extra spacing
    ("final   answer: I will choose to consume 650,000 units now and 900,000 later.", OK, (650000, 900000)),
    # bold markdown marker
    ("**Final Answer:** I will choose to consume **720,000** units during my working period and "
     "**810,000** units during my retirement period because balance.", OK, (720000, 810000)),
    # restated answer: the last block wins
    ("Final Answer: I will choose to consume 600,000 and 900,000.\nOn reflection, let me revise.\n"
     "Final Answer: I will choose to consume 730,000 units during my working period and 790,000 "
     "units during my retirement period because balance.", OK, (730000, 790000)),
    # reasoning numbers before the marker are ignored
    ("My total resources are 1,264,159 units and the rate is 48.6%. c1 is 725,677 in theory.\n"
     "Final Answer: I will choose to consume 700,000 units during my working period and 830,000 "
     "units during my retirement period because I prefer a buffer.", OK, (700000, 830000)),
    # a percentage in the answer is skipped
    ("Final Answer: I will choose to consume 760,000 units during my working period and, given the "
     "48.6% interest, 750,000 units during my retirement period because balance.", OK, (760000, 750000)),
    # numbers after the pair do not matter
    ("Final Answer: I will choose to consume 700,000 units during my working period and 840,000 "
     "units during my retirement period because I keep 1 buffer for 2 emergencies.", OK, (700000, 840000)),
    # scale words
    ("Final Answer: I will choose to consume 0.72 million units during my working period and "
     "0.8 million units during my retirement period because smoothing.", OK, (720000, 800000)),
    ("Final Answer: I will choose to consume 700 thousand units now and 850 thousand units later.",
     OK, (700000, 850000)),
    # identifiers glued to digits are not numbers
    ("Final Answer: c1 = 710,000 units and c2 = 820,000 units because of the Euler equation.",
     OK, (710000, 820000)),
    # trailing punctuation
    ("Final Answer: I will choose to consume 712,345.5 units during my working period and "
     "801,234.25 units during my retirement period.", OK, (712345.5, 801234.25)),
    # marker inside a sentence with a colon-less variant
    ("So my Final Answer is that I will choose to consume 705,000 units during my working period "
     "and 815,000 units during my retirement period because balance.", OK, (705000, 815000)),
    # dollar-like signs
    ("Final Answer: I will choose to consume $740,000 in the working period and $780,000 in "
     "retirement because I value the present.", OK, (740000, 780000)),
    # line breaks between numbers
    ("Final Answer:\n- Working period: 690,000 units\n- Retirement period: 880,000 units\n"
     "because rates are high.", OK, (690000, 880000)),
    # zero consumption in retirement is a valid (if odd) answer
    ("Final Answer: I will choose to consume 1,264,159 units during my working period and 0 "
     "units during my retirement period because life is short.", OK, (1264159, 0)),
    # integer without separators and decimals with one place
    ("Final Answer: I will choose to consume 725677.2 units during my working period and "
     "800013.2 units during my retirement period because balance.", OK, (725677.2, 800013.2)),
    # a year-like tax mention before the numbers as a percentage is skipped
    ("Final Answer: With a 30 % tax I will choose to consume 735,000 units during my working "
     "period and 770,000 units during my retirement period.", OK, (735000, 770000)),
    # CJK text in the reasons
    ("Final Answer: I will choose to consume 690,000 units during my working period and 860,000 "
     "units during my retirement period because 未雨绸缪.", OK, (690000, 860000)),
    # missing markers
    ("I would consume 725,677 units now and 800,013 units in retirement.", NONE, None),
    ("Answer: I will choose to consume 725,677 and 800,013.", NONE, None),
    ("", NONE, None),
    ("Final result: 700,000 and 800,000.", NONE, None),
    # marker without numbers
    ("Final Answer: I will choose to consume ____ units during my working period and ____ units "
     "during my retirement period because_____", BAD, None),
    # one number only
    ("Final Answer: I will choose to consume 725,677 units during my working period and the rest "
     "during retirement.", BAD, None),
    # ranges in either position
    ("Final Answer: I will choose to consume between 700,000 and 750,000 units during my working "
     "period and 800,000 units during my retirement period.", BAD, None),
    ("Final Answer: I will choose to consume 700,000-750,000 units during my working period and "
     "800,000 units during my retirement period.", BAD, None),
    ("Final Answer: I will choose to consume 720,000 units during my working period and 780,000 "
     "to 820,000 units during my retirement period.", BAD, None),
    ("Final Answer: I will choose to consume 700,000 – 750,000 units now and 800,000 later.", BAD, None),
    ("Final Answer: I will choose to consume 700,000 or 710,000 units now and 800,000 later.", BAD, None),
    ("Final Answer: I will choose to consume roughly 700,000 ~ 720,000 units in the working period "
     "and 800,000 units later.", BAD, None),
    # only percentages after the marker
    ("Final Answer: I will choose to consume 55% of my resources now and 45% later.", BAD, None),
    # earlier block is fine but the last block is malformed: last block wins
    ("Final Answer: I will choose to consume 700,000 and 800,000.\n"
     "Final Answer: I will choose to consume about half now and the rest later.", BAD, None),
]
