"""Abstract machinery: function classes, certificates, iteration, Gronwall."""
