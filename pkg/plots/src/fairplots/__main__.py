from fairplots.render import entry

entry()
